#include "rda/experiment.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <string_view>

#include "rda/checkpoint.h"
#include "rda/errors.h"

namespace rda {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  if (text.empty() || res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key, "cannot parse '" + std::string(text) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key, "must be finite");
  }
  return value;
}

bool parse_bool(const std::string& key, std::string_view text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(text) + "'");
}

std::string format_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, std::string_view)>;

template <typename T, typename Member>
Setter number(Member member) {
  return [member](ExperimentConfig& c, const std::string& key, std::string_view v) {
    std::invoke(member, c) = parse_number<T>(key, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"train.batch_size", number<std::size_t>([](ExperimentConfig& c) -> auto& {
         return c.train.batch_size;
       })},
      {"train.inner_iters", number<std::size_t>([](ExperimentConfig& c) -> auto& {
         return c.train.inner_iters;
       })},
      {"train.epochs",
       number<int>([](ExperimentConfig& c) -> auto& { return c.train.epochs; })},
      {"train.c", number<double>([](ExperimentConfig& c) -> auto& { return c.train.c; })},
      {"train.eta_w",
       number<double>([](ExperimentConfig& c) -> auto& { return c.train.eta_w; })},
      {"train.eta_tau",
       number<double>([](ExperimentConfig& c) -> auto& { return c.train.eta_tau; })},
      {"train.eta_eps",
       number<double>([](ExperimentConfig& c) -> auto& { return c.train.eta_eps; })},
      {"train.eta_lambda",
       number<double>([](ExperimentConfig& c) -> auto& { return c.train.eta_lambda; })},
      {"train.eta_mu",
       number<double>([](ExperimentConfig& c) -> auto& { return c.train.eta_mu; })},
      {"train.timing",
       [](ExperimentConfig& c, const std::string& key, std::string_view v) {
         c.train.timing = parse_bool(key, v);
       }},
      {"model.hidden",
       number<std::size_t>([](ExperimentConfig& c) -> auto& { return c.train.hidden; })},
      {"data.samples",
       number<std::size_t>([](ExperimentConfig& c) -> auto& { return c.data.num_samples; })},
      {"data.test_size",
       number<std::size_t>([](ExperimentConfig& c) -> auto& { return c.test_size; })},
      {"data.dim", number<std::size_t>([](ExperimentConfig& c) -> auto& { return c.data.dim; })},
      {"data.classes",
       number<std::size_t>([](ExperimentConfig& c) -> auto& { return c.data.num_classes; })},
      {"data.size_means",
       [](ExperimentConfig& c, const std::string& key, std::string_view v) {
         const auto parts = split_list(v);
         if (parts.size() != 2) throw ConfigError(key, "expected two values: small, large");
         c.data.size_means[0] = parse_number<double>(key, parts[0]);
         c.data.size_means[1] = parse_number<double>(key, parts[1]);
       }},
      {"data.size_stds",
       [](ExperimentConfig& c, const std::string& key, std::string_view v) {
         const auto parts = split_list(v);
         if (parts.size() != 2) throw ConfigError(key, "expected two values: small, large");
         c.data.size_stds[0] = parse_number<double>(key, parts[0]);
         c.data.size_stds[1] = parse_number<double>(key, parts[1]);
       }},
      {"data.mixture_weight",
       number<double>([](ExperimentConfig& c) -> auto& { return c.data.mixture_weight; })},
      {"data.size_class_correlation", number<double>([](ExperimentConfig& c) -> auto& {
         return c.data.size_class_correlation;
       })},
      {"data.separation",
       number<double>([](ExperimentConfig& c) -> auto& { return c.data.separation; })},
      {"data.size_shift",
       number<double>([](ExperimentConfig& c) -> auto& { return c.data.size_shift; })},
      {"data.noise_std",
       number<double>([](ExperimentConfig& c) -> auto& { return c.data.noise_std; })},
      {"data.label_noise",
       number<double>([](ExperimentConfig& c) -> auto& { return c.data.label_noise; })},
      {"data.threshold",
       [](ExperimentConfig& c, const std::string& key, std::string_view v) {
         if (v == "mean") {
           c.data.threshold = ThresholdPolicy{};
         } else {
           c.data.threshold = {ThresholdPolicy::Kind::fixed, parse_number<double>(key, v)};
         }
       }},
      {"data.csv",
       [](ExperimentConfig& c, const std::string&, std::string_view v) {
         if (v.empty()) {
           c.data_csv.reset();
         } else {
           c.data_csv = std::filesystem::path(std::string(v));
         }
       }},
      {"experiment.alphas",
       [](ExperimentConfig& c, const std::string& key, std::string_view v) {
         c.alphas.clear();
         for (auto part : split_list(v)) {
           const double a = parse_number<double>(key, part);
           if (a < 0.0) throw ConfigError(key, "alpha must be >= 0, got " + format_real(a));
           c.alphas.push_back(a);
         }
       }},
      {"experiment.modes",
       [](ExperimentConfig& c, const std::string& key, std::string_view v) {
         c.modes.clear();
         for (auto part : split_list(v)) {
           try {
             c.modes.push_back(parse_projection_mode(std::string(part)));
           } catch (const ConfigError& e) {
             throw ConfigError(key, e.what());
           }
         }
       }},
      {"experiment.repeats",
       number<int>([](ExperimentConfig& c) -> auto& { return c.repeats; })},
      {"experiment.seed",
       number<std::uint64_t>([](ExperimentConfig& c) -> auto& { return c.seed; })},
      {"experiment.out",
       [](ExperimentConfig& c, const std::string&, std::string_view v) {
         c.out_dir = std::filesystem::path(std::string(v));
       }},
  };
  return table;
}

void validate(const ExperimentConfig& c) {
  if (c.alphas.empty()) throw ConfigError("experiment.alphas", "needs at least one value");
  for (double a : c.alphas) {
    if (!(a >= 0.0)) throw ConfigError("experiment.alphas", "alpha must be >= 0");
  }
  if (c.modes.empty()) throw ConfigError("experiment.modes", "needs at least one mode");
  if (c.repeats < 1) throw ConfigError("experiment.repeats", "must be >= 1");
  if (c.out_dir.empty()) throw ConfigError("experiment.out", "must not be empty");
  c.train.validate();
  if (!c.data_csv) {
    c.data.validate();
    if (c.data.num_samples < 2) throw ConfigError("data.samples", "must be >= 2");
  }
}

std::string alpha_tag(double alpha) { return format_real(alpha); }

std::string run_name(ProjectionMode mode, double alpha, std::uint64_t seed) {
  return to_string(mode) + "_alpha" + alpha_tag(alpha) + "_seed" + std::to_string(seed);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("experiment.out", "cannot write " + path.string());
  return out;
}

// Training and test split for one repeat.
std::pair<LabeledDataset, LabeledDataset> load_data(const ExperimentConfig& c,
                                                    std::uint64_t seed) {
  LabeledDataset all;
  if (c.data_csv) {
    all = load_csv(*c.data_csv, c.data.threshold);
  } else {
    GenSpec spec = c.data;
    spec.num_samples = c.data.num_samples + c.test_size;
    spec.seed = seed;
    all = generate(spec);
  }
  if (c.test_size >= all.size()) {
    throw ConfigError("data.test_size", "leaves no training rows");
  }
  return split_tail(all, c.test_size);
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(line_no, "missing key");
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    it->second(config, key, value);
  }
  validate(config);
  return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_experiment_config(text.str());
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto line = [&](const char* key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  const auto& t = c.train;
  const auto& d = c.data;
  line("train.batch_size", std::to_string(t.batch_size));
  line("train.inner_iters", std::to_string(t.inner_iters));
  line("train.epochs", std::to_string(t.epochs));
  line("train.c", format_real(t.c));
  line("train.eta_w", format_real(t.eta_w));
  line("train.eta_tau", format_real(t.eta_tau));
  line("train.eta_eps", format_real(t.eta_eps));
  line("train.eta_lambda", format_real(t.eta_lambda));
  line("train.eta_mu", format_real(t.eta_mu));
  line("train.timing", t.timing ? "true" : "false");
  line("model.hidden", std::to_string(t.hidden));
  line("data.samples", std::to_string(d.num_samples));
  line("data.test_size", std::to_string(c.test_size));
  line("data.dim", std::to_string(d.dim));
  line("data.classes", std::to_string(d.num_classes));
  line("data.size_means", format_real(d.size_means[0]) + ", " + format_real(d.size_means[1]));
  line("data.size_stds", format_real(d.size_stds[0]) + ", " + format_real(d.size_stds[1]));
  line("data.mixture_weight", format_real(d.mixture_weight));
  line("data.size_class_correlation", format_real(d.size_class_correlation));
  line("data.separation", format_real(d.separation));
  line("data.size_shift", format_real(d.size_shift));
  line("data.noise_std", format_real(d.noise_std));
  line("data.label_noise", format_real(d.label_noise));
  line("data.threshold", d.threshold.kind == ThresholdPolicy::Kind::mean
                             ? std::string("mean")
                             : format_real(d.threshold.value));
  line("data.csv", c.data_csv ? c.data_csv->string() : std::string());
  std::string alphas, modes;
  for (double a : c.alphas) alphas += (alphas.empty() ? "" : ", ") + format_real(a);
  for (auto m : c.modes) modes += (modes.empty() ? "" : ", ") + to_string(m);
  line("experiment.alphas", alphas);
  line("experiment.modes", modes);
  line("experiment.repeats", std::to_string(c.repeats));
  line("experiment.seed", std::to_string(c.seed));
  line("experiment.out", c.out_dir.string());
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream& log) {
  validate(config);
  const auto trace_dir = config.out_dir / "traces";
  const auto checkpoint_dir = config.out_dir / "checkpoints";
  for (const auto& dir : {trace_dir, checkpoint_dir}) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("experiment.out", "cannot create " + dir.string());
  }
  open_output(config.out_dir / "config.txt") << echo_config(config);

  ExperimentResult result;
  // Traces per (alpha, seed), one per mode, for the projection comparison.
  std::vector<std::pair<double, std::vector<TrainTrace>>> by_alpha_seed;
  for (int rep = 0; rep < config.repeats; ++rep) {
    const std::uint64_t seed = config.seed + static_cast<std::uint64_t>(rep);
    const auto [train_set, test_set] = load_data(config, seed);
    const LabeledDataset* eval = config.test_size > 0 ? &test_set : nullptr;
    for (double alpha : config.alphas) {
      std::vector<TrainTrace> traces;
      for (auto mode : config.modes) {
        TrainConfig tc = config.train;
        tc.alpha = alpha;
        tc.mode = mode;
        tc.seed = seed;
        const auto run = train(train_set, tc, eval);
        const auto name = run_name(mode, alpha, seed);
        const auto path = trace_dir / (name + ".csv");
        auto out = open_output(path);
        write_trace_csv(out, run.trace);
        out.close();
        save_checkpoint(run.params, checkpoint_dir / (name + ".rdat"));
        const auto& last = run.trace.epochs.back();
        log << to_string(mode) << " alpha=" << alpha_tag(alpha) << " seed=" << seed
            << " acc=" << last.acc << " f1_size=" << last.f1_size
            << " projections=" << run.trace.total_projections() << '\n';
        result.runs.push_back({mode, alpha, seed, path});
        traces.push_back(run.trace);
      }
      by_alpha_seed.emplace_back(alpha, std::move(traces));
    }
  }

  result.summary = summarize_traces(result.runs);
  auto summary = open_output(config.out_dir / "summary.csv");
  write_summary_csv(summary, result.summary);

  if (config.modes.size() > 1) {
    auto out = open_output(config.out_dir / "projections.csv");
    out << "alpha,mode,seed,epochs,inner_iters,projections,sort_calls,proj_ms\n";
    for (const auto& [alpha, traces] : by_alpha_seed) {
      for (const auto& row : projection_count_report(traces).rows) {
        out << alpha_tag(alpha) << ',' << to_string(row.mode) << ',' << row.seed << ','
            << row.epochs << ',' << row.inner_iters << ',' << row.projections << ','
            << row.sort_calls << ',' << format_real(row.proj_ms) << '\n';
      }
    }
  }
  return result;
}

std::map<std::string, std::vector<double>> read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("trace", "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw EmptyDatasetError(path.string() + ": empty trace");
  std::vector<std::string> names;
  for (auto name : split_list(line)) names.emplace_back(name);
  std::map<std::string, std::vector<double>> columns;
  for (const auto& n : names) columns[n];
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_list(line);
    if (fields.size() != names.size()) throw ParseError(line_no, "wrong number of columns");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      double v = 0.0;
      const auto* end = fields[i].data() + fields[i].size();
      const auto res = std::from_chars(fields[i].data(), end, v);
      if (res.ec != std::errc() || res.ptr != end) {
        throw ParseError(line_no, "bad number in column " + names[i]);
      }
      columns[names[i]].push_back(v);
    }
  }
  return columns;
}

std::vector<SummaryRow> summarize_traces(const std::vector<RunRecord>& runs) {
  // Groups in first-appearance order.
  std::vector<std::pair<ProjectionMode, double>> groups;
  std::map<std::pair<int, double>, std::vector<std::map<std::string, double>>> finals;
  std::vector<std::string> metric_order;
  for (const auto& run : runs) {
    const auto key = std::make_pair(static_cast<int>(run.mode), run.alpha);
    if (!finals.contains(key)) groups.emplace_back(run.mode, run.alpha);
    const auto cols = read_trace_csv(run.trace_file);
    std::map<std::string, double> values;
    if (metric_order.empty()) {
      for (const char* name : {"erm_loss", "lagrangian", "acc", "acc_small", "acc_large",
                               "f1_size", "viol_ineq", "viol_eq"}) {
        metric_order.emplace_back(name);
      }
      metric_order.emplace_back("total_projections");
    }
    for (const auto& name : metric_order) {
      if (name == "total_projections") continue;
      const auto it = cols.find(name);
      if (it == cols.end() || it->second.empty()) {
        throw ParseError(1, run.trace_file.string() + ": missing column " + name);
      }
      values[name] = it->second.back();
    }
    double total = 0.0;
    for (double p : cols.at("n_proj")) total += p;
    values["total_projections"] = total;
    finals[key].push_back(std::move(values));
  }

  std::vector<SummaryRow> rows;
  for (const auto& [mode, alpha] : groups) {
    const auto& runs_in_group = finals.at({static_cast<int>(mode), alpha});
    for (const auto& metric : metric_order) {
      std::vector<double> xs;
      for (const auto& r : runs_in_group) xs.push_back(r.at(metric));
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      rows.push_back({mode, alpha, metric, mean, sample_std(xs, mean), xs.size()});
    }
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "mode,alpha,metric,mean,std,runs\n";
  for (const auto& r : rows) {
    out << to_string(r.mode) << ',' << alpha_tag(r.alpha) << ',' << r.metric << ','
        << format_real(r.mean) << ',' << format_real(r.std) << ',' << r.runs << '\n';
  }
}

}  // namespace rda
