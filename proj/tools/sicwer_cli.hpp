#pragma once

// Command-line front end: formula, simulate, compare, sweep and selfcheck.
// Every data command writes CSV: one '#' line echoing the run, a column
// header, then rows. Exit codes: 0 ok, 1 usage error, 2 numerical failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sicwer/monte_carlo.hpp"
#include "sicwer/selfcheck.hpp"
#include "sicwer/special_functions.hpp"
#include "sicwer/wer.hpp"

namespace sicwer::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  Eigen::Index m = 0;
  std::vector<Eigen::Index> n;
  std::vector<double> sigma;
  std::vector<double> snr_db;
  std::int64_t pam_u = 0;
  std::optional<std::int64_t> box_cube;
  std::string box_file;
  std::uint64_t trials = 100000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  std::string out;
  std::string config;
  bool amortized = false;
  std::string preset;
  bool formula_only = false;
  double tolerance = 0.0;
};

// One (axis value, model) point of a WER table.
struct Row {
  double axis = 0.0;
  double sigma = 0.0;
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::optional<std::int64_t> d;
  std::optional<BoxConstraint> box;
};

struct Plan {
  std::string axis_name = "sigma";
  std::string echo;
  bool d_column = false;
  std::vector<Row> rows;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Shortest text that reads back to the same double.
inline std::string exact(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& render) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) s += ',';
    s += render(values[i]);
  }
  return s;
}

inline std::string join_ints(const std::vector<Eigen::Index>& values) {
  return join(values, [](Eigen::Index v) { return std::to_string(v); });
}

inline std::string join_exact(const std::vector<double>& values) { return join(values, exact); }

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline BoxConstraint read_box_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open box file '" + path + "'");
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::int64_t l = 0;
    std::int64_t u = 0;
    std::string extra;
    if (!(fields >> l >> u) || (fields >> extra)) {
      throw UsageError("box file '" + path + "' line " + std::to_string(line_no) + ": expected two integers");
    }
    if (l > u) throw UsageError("box file '" + path + "' line " + std::to_string(line_no) + ": lower bound above upper");
    lower.push_back(l);
    upper.push_back(u);
  }
  if (lower.empty()) throw UsageError("box file '" + path + "' has no coordinates");
  const auto size = static_cast<Eigen::Index>(lower.size());
  return BoxConstraint(Eigen::Map<IntVector>(lower.data(), size), Eigen::Map<IntVector>(upper.data(), size));
}

inline std::string describe_box(const BoxConstraint& box) {
  std::string s = "bounds:";
  for (Eigen::Index i = 0; i < box.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(box.lower()[i]) + ":" + std::to_string(box.upper()[i]);
  }
  return s;
}

inline std::vector<double> sigma_grid(int last) {
  std::vector<double> grid;
  for (int i = 1; i <= last; ++i) grid.push_back(i / 20.0);
  return grid;
}

// z = (mc - formula) / SE; a zero SE falls back to the formula's own binomial
// SE, and to 0 when that vanishes too.
inline double z_score(double formula, double mc, double std_error, std::uint64_t trials) {
  double se = std_error;
  if (se == 0.0) se = std::sqrt(formula * (1.0 - formula) / static_cast<double>(trials));
  if (se == 0.0) return 0.0;
  return (mc - formula) / se;
}

// Appends `--key value` tokens from a key=value file for keys the command
// line did not set. Keys another subcommand understands are skipped so one
// file can drive several commands; unknown keys are errors.
inline void merge_config(std::vector<std::string>& args, const std::string& path, const CLI::App& app) {
  const CLI::App* command = nullptr;
  for (const auto& a : args) {
    if (a.empty() || a[0] == '-') continue;
    command = app.get_subcommand_no_throw(a);
    break;
  }
  if (command == nullptr) return;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  const auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config '" + path + "' line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw UsageError("config files cannot include other config files");
    const std::string flag = "--" + key;
    if (command->get_option_no_throw(flag) == nullptr) {
      const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
      const bool known = std::any_of(subs.begin(), subs.end(),
                                     [&](const CLI::App* sub) { return sub->get_option_no_throw(flag) != nullptr; });
      if (!known) throw UsageError("config '" + path + "' line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      continue;
    }
    if (given(flag)) continue;
    if (key == "amortized" || key == "formula-only") {
      if (value == "true" || value == "1" || value == "yes") {
        extra.push_back(flag);
      } else if (value != "false" && value != "0" && value != "no") {
        throw UsageError("config key '" + key + "' expects true or false");
      }
      continue;
    }
    extra.push_back(flag);
    extra.push_back(value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

inline std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

inline Plan build_plan(const Options& o, const std::string& command, bool with_simulation) {
  if (o.sigma.empty() == o.snr_db.empty()) throw UsageError("give exactly one of --sigma or --snr-db");
  if (!o.box_file.empty() && o.box_cube) throw UsageError("--box-cube and --box-file are exclusive");
  if (o.box_cube && *o.box_cube < 0) throw UsageError("--box-cube must be >= 0");
  if (with_simulation && o.trials < 1) throw UsageError("--trials must be >= 1");

  Plan plan;
  std::vector<double> axis = o.sigma;
  std::optional<std::int64_t> cube = o.box_cube;
  std::optional<BoxConstraint> file_box;

  if (!o.snr_db.empty()) {
    plan.axis_name = "snr_db";
    axis = o.snr_db;
    if (o.pam_u < 1) throw UsageError("--snr-db needs --pam-u >= 1");
    if (!o.box_file.empty()) throw UsageError("--snr-db needs a cube box; --box-file is not allowed");
    if (o.box_cube && *o.box_cube != o.pam_u) throw UsageError("--box-cube must equal --pam-u on the SNR axis");
    cube = o.pam_u;
    for (double s : axis) {
      if (!std::isfinite(s)) throw UsageError("--snr-db values must be finite");
    }
  } else {
    if (o.pam_u != 0) throw UsageError("--pam-u only applies with --snr-db");
    for (double s : axis) {
      if (!(s > 0.0) || !std::isfinite(s)) throw UsageError("--sigma values must be finite and > 0");
    }
  }

  std::vector<Eigen::Index> ns = o.n;
  if (!o.box_file.empty()) {
    file_box = read_box_file(o.box_file);
    if (ns.empty()) ns.push_back(file_box->size());
    if (ns.size() != 1 || ns[0] != file_box->size()) throw UsageError("--n must match the box file dimension");
  }
  if (ns.empty()) throw UsageError("give at least one --n");
  for (auto n : ns) {
    if (n < 1) throw UsageError("--n values must be >= 1");
    if (o.m != 0 && o.m < n) throw UsageError("--m must be >= every --n");
  }
  if (o.m < 0) throw UsageError("--m must be >= 1");

  std::ostringstream echo;
  echo << "# sicwer " << command << " m=" << (o.m != 0 ? std::to_string(o.m) : std::string("n")) << " n=" << join_ints(ns);
  if (plan.axis_name == "sigma") {
    echo << " sigma=" << join_exact(axis);
  } else {
    echo << " snr_db=" << join_exact(axis) << " pam_u=" << o.pam_u;
  }
  echo << " box=" << (file_box ? describe_box(*file_box) : cube ? "cube:" + std::to_string(*cube) : std::string("none"));
  if (with_simulation) echo << " trials=" << o.trials << " seed=" << o.seed << " amortized=" << (o.amortized ? 1 : 0);
  plan.echo = echo.str();
  plan.d_column = cube.has_value();

  for (auto n : ns) {
    for (double a : axis) {
      Row row;
      row.axis = a;
      row.sigma = plan.axis_name == "sigma" ? a : sigma_from_snr_db(*cube, a);
      row.n = n;
      row.m = o.m != 0 ? o.m : n;
      if (cube) {
        row.d = cube;
        row.box = BoxConstraint::cube(n, *cube);
      } else if (file_box) {
        row.box = file_box;
      }
      plan.rows.push_back(std::move(row));
    }
  }
  return plan;
}

inline double formula_for(const Row& row) {
  return row.box ? wer_bsic(row.m, *row.box, row.sigma) : wer_osic(row.m, row.n, row.sigma);
}

inline WerEstimate simulate_row(const Row& row, const Options& o) {
  TrialConfig config = row.box ? TrialConfig::bsic(row.m, *row.box, row.sigma, o.trials, o.seed)
                               : TrialConfig::osic(row.m, row.n, row.sigma, o.trials, o.seed);
  config.workers = o.workers;
  config.amortized_matrix = o.amortized;
  return run_wer_experiment(config);
}

inline std::string render(const Plan& plan, const Options& o, bool with_formula, bool with_simulation) {
  std::ostringstream csv;
  csv << plan.echo << '\n' << plan.axis_name << ",n,m";
  if (plan.d_column) csv << ",d";
  if (with_formula) csv << ",wer_formula";
  if (with_simulation) csv << ",wer_mc,std_error,trials";
  if (with_formula && with_simulation) csv << ",z_score";
  csv << '\n';

  double max_abs_z = 0.0;
  for (const Row& row : plan.rows) {
    csv << fmt(row.axis) << ',' << row.n << ',' << row.m;
    if (plan.d_column) csv << ',' << (row.d ? std::to_string(*row.d) : std::string());
    double formula = 0.0;
    if (with_formula) {
      formula = formula_for(row);
      csv << ',' << fmt(formula);
    }
    if (with_simulation) {
      const WerEstimate est = simulate_row(row, o);
      csv << ',' << fmt(est.wer) << ',' << fmt(est.std_error) << ',' << est.trials;
      if (with_formula) {
        const double z = z_score(formula, est.wer, est.std_error, est.trials);
        max_abs_z = std::max(max_abs_z, std::abs(z));
        csv << ',' << fmt(z);
      }
    }
    csv << '\n';
  }
  if (with_formula && with_simulation) csv << "# max_abs_z=" << fmt(max_abs_z) << '\n';
  return csv.str();
}

// Scalar success tables: P_k, or the boxed version with width d.
inline std::string render_scalar(const std::string& preset, const std::vector<double>& sigmas,
                                 const std::vector<std::int64_t>& widths, const Options& o) {
  const bool boxed = !widths.empty();
  const bool simulate = !o.formula_only;
  std::ostringstream csv;
  csv << "# sicwer sweep preset=" << preset << " k=1..64 sigma=" << join_exact(sigmas);
  if (boxed) csv << " d=" << join(widths, [](std::int64_t d) { return std::to_string(d); });
  if (simulate) csv << " trials=" << o.trials << " seed=" << o.seed;
  csv << '\n' << "sigma,k";
  if (boxed) csv << ",d";
  csv << ",p_formula";
  if (simulate) csv << ",p_mc,std_error,trials,z_score";
  csv << '\n';

  const std::vector<std::optional<std::int64_t>> series =
      boxed ? std::vector<std::optional<std::int64_t>>(widths.begin(), widths.end())
            : std::vector<std::optional<std::int64_t>>{std::nullopt};
  double max_abs_z = 0.0;
  for (const auto& d : series) {
    for (double sigma : sigmas) {
      for (int k = 1; k <= 64; ++k) {
        const double p = d ? p_bar_k(k, *d, sigma) : p_k(k, sigma);
        csv << fmt(sigma) << ',' << k;
        if (d) csv << ',' << *d;
        csv << ',' << fmt(p);
        if (simulate) {
          const auto est = simulate_scalar_success(k, sigma, d, o.trials, o.seed, o.workers);
          const double z = z_score(p, est.proportion, est.std_error, est.trials);
          max_abs_z = std::max(max_abs_z, std::abs(z));
          csv << ',' << fmt(est.proportion) << ',' << fmt(est.std_error) << ',' << est.trials << ',' << fmt(z);
        }
        csv << '\n';
      }
    }
  }
  if (simulate) csv << "# max_abs_z=" << fmt(max_abs_z) << '\n';
  return csv.str();
}

inline Plan preset_plan(const std::string& preset, const Options& o) {
  Plan plan;
  const auto add = [&](Eigen::Index n, double axis, double sigma, std::optional<std::int64_t> d) {
    Row row;
    row.axis = axis;
    row.sigma = sigma;
    row.n = n;
    row.m = n;
    row.d = d;
    if (d) row.box = BoxConstraint::cube(n, *d);
    plan.rows.push_back(std::move(row));
  };

  if (preset == "fig1") {
    for (Eigen::Index n : {2, 5, 10, 20, 64}) {
      for (double s : sigma_grid(9)) add(n, s, s, std::nullopt);
    }
  } else if (preset == "fig3" || preset == "fig4") {
    const std::int64_t u = preset == "fig3" ? 1 : 3;
    plan.axis_name = "snr_db";
    plan.d_column = true;
    for (Eigen::Index n : {2, 10, 20}) {
      for (int step = 0; step <= 8; ++step) {
        const double snr = 10.0 + 2.5 * step;
        add(n, snr, sigma_from_snr_db(u, snr), u);
      }
    }
  } else if (preset == "fig5" || preset == "bsic63") {
    plan.d_column = true;
    const std::vector<std::int64_t> widths =
        preset == "fig5" ? std::vector<std::int64_t>{1, 3, 7, 63} : std::vector<std::int64_t>{63};
    const std::vector<Eigen::Index> ns =
        preset == "fig5" ? std::vector<Eigen::Index>{20} : std::vector<Eigen::Index>{2, 5, 10, 20};
    for (auto n : ns) {
      for (double s : sigma_grid(10)) add(n, s, s, std::nullopt);
      for (auto d : widths) {
        for (double s : sigma_grid(10)) add(n, s, s, d);
      }
    }
  } else {
    throw UsageError("unknown preset '" + preset + "' (fig1, fig2, fig3, fig4, fig5, fig6, bsic63)");
  }

  std::ostringstream echo;
  echo << "# sicwer sweep preset=" << preset;
  if (!o.formula_only) echo << " trials=" << o.trials << " seed=" << o.seed << " amortized=" << (o.amortized ? 1 : 0);
  plan.echo = echo.str();
  return plan;
}

inline void emit(const std::string& text, const Options& o, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot write '" + o.out + "'");
  file << text;
  if (!file) throw std::runtime_error("write to '" + o.out + "' failed");
}

inline void add_model_options(CLI::App& sub, Options& o) {
  sub.add_option("--m", o.m, "rows of the model matrix (default: m = n)");
  sub.add_option("--n", o.n, "number of unknowns (repeatable)")->delimiter(',');
  sub.add_option("--sigma", o.sigma, "noise standard deviation (repeatable)")->delimiter(',');
  sub.add_option("--snr-db", o.snr_db, "PAM SNR in dB (repeatable; needs --pam-u)")->delimiter(',');
  sub.add_option("--pam-u", o.pam_u, "PAM alphabet {0..u}; sets the cube box on the SNR axis");
  sub.add_option("--box-cube", o.box_cube, "box [0, d]^n for BSIC");
  sub.add_option("--box-file", o.box_file, "box bounds, one 'lower upper' pair per line");
}

inline void add_run_options(CLI::App& sub, Options& o) {
  sub.add_option("--trials", o.trials, "Monte-Carlo trials per row");
  sub.add_option("--seed", o.seed, "RNG seed");
  sub.add_option("--workers", o.workers, "worker threads (0: all cores)");
  sub.add_flag("--amortized", o.amortized, "draw one model matrix per row instead of per trial");
}

inline void add_io_options(CLI::App& sub, Options& o) {
  sub.add_option("--out", o.out, "output CSV path (default: stdout)");
  sub.add_option("--config", o.config, "key=value file; command-line flags win");
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Word error rates of successive interference cancellation decoders"};
  app.require_subcommand(1, 1);

  auto* formula = app.add_subcommand("formula", "closed-form WER table");
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo WER table");
  auto* compare = app.add_subcommand("compare", "closed form against Monte Carlo, with z-scores");
  for (auto* sub : {formula, simulate, compare}) {
    detail::add_model_options(*sub, o);
    detail::add_io_options(*sub, o);
  }
  detail::add_run_options(*simulate, o);
  detail::add_run_options(*compare, o);

  auto* sweep = app.add_subcommand("sweep", "canned figure grids");
  sweep->add_option("--preset", o.preset, "fig1, fig2, fig3, fig4, fig5, fig6 or bsic63");
  sweep->add_flag("--formula-only", o.formula_only, "skip the Monte-Carlo columns");
  detail::add_run_options(*sweep, o);
  detail::add_io_options(*sweep, o);

  auto* selfcheck = app.add_subcommand("selfcheck", "run the bundled invariant checks");
  auto* tolerance = selfcheck->add_option("--tolerance", o.tolerance, "replace every check tolerance");

  try {
    if (auto config = detail::find_config(args)) detail::merge_config(args, *config, app);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kOk;
    }
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*selfcheck) {
      SelfcheckOptions options;
      if (tolerance->count() > 0) options.tolerance_override = o.tolerance;
      const auto results = run_selfcheck(options);
      std::size_t passed = 0;
      for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
        passed += r.passed;
      }
      out << "selfcheck: " << passed << "/" << results.size() << " checks passed\n";
      return passed == results.size() ? kOk : kNumerical;
    }
    if (*sweep) {
      if (o.preset.empty()) throw UsageError("sweep needs --preset");
      if (!o.formula_only && o.trials < 1) throw UsageError("--trials must be >= 1");
      if (o.preset == "fig2") {
        detail::emit(detail::render_scalar("fig2", {0.1, 0.5}, {}, o), o, out);
      } else if (o.preset == "fig6") {
        detail::emit(detail::render_scalar("fig6", {0.1, 0.5}, {1, 3, 63}, o), o, out);
      } else {
        const Plan plan = detail::preset_plan(o.preset, o);
        detail::emit(detail::render(plan, o, true, !o.formula_only), o, out);
      }
      return kOk;
    }
    const bool sim = *simulate || *compare;
    const std::string command = *formula ? "formula" : *simulate ? "simulate" : "compare";
    const Plan plan = detail::build_plan(o, command, sim);
    detail::emit(detail::render(plan, o, !*simulate, sim), o, out);
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {  // DimensionError, ConfigError
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace sicwer::cli
