#include <chrono>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "wtcap/cli.hpp"
#include "wtcap/error.hpp"
#include "wtcap/parallel.hpp"

namespace wtcap::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

using Override = std::function<void(RunConfig&)>;

struct Invocation {
  std::string command;
  std::string channel_path;
  std::string config_path;
  std::string out_dir = ".";
  std::string name;
  std::vector<Override> overrides;

  // Grid flags, resolved after the manifest is merged.
  std::optional<double> from_db;
  std::optional<double> to_db;
  std::optional<int> points;
  std::optional<std::vector<double>> powers;
  std::optional<std::vector<double>> powers_db;
};

struct Outcome {
  std::string report;
  std::vector<std::pair<fs::path, std::string>> files;
  int exit_code = kExitOk;
};

// ---- formatting -----------------------------------------------------------

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return q + "\"";
}

void print_matrix(std::ostream& os, const std::string& label, const Matrix& a) {
  os << label << " =\n";
  for (Index i = 0; i < a.rows(); ++i) {
    os << "  ";
    for (Index j = 0; j < a.cols(); ++j) os << std::setw(14) << a(i, j);
    os << "\n";
  }
}

double to_bits(double nats) { return nats / std::log(2.0); }

double rate_unit(const RunConfig& cfg) { return cfg.bits ? 1.0 / std::log(2.0) : 1.0; }

std::optional<double> scaled(const std::optional<double>& v, double k) {
  return v ? std::optional<double>(*v * k) : std::nullopt;
}

// ---- flag registration ----------------------------------------------------

template <typename T>
void bind(CLI::App* sub, Invocation& inv, const std::string& flag, const std::string& help,
          std::function<void(RunConfig&, T)> apply) {
  sub->add_option_function<T>(
      flag, [&inv, apply](const T& v) { inv.overrides.push_back([apply, v](RunConfig& c) { apply(c, v); }); },
      help);
}

void add_solver_flags(CLI::App* sub, Invocation& inv) {
  bind<double>(sub, inv, "--alpha", "line-search acceptance fraction", [](RunConfig& c, double v) { c.solver.alpha = v; });
  bind<double>(sub, inv, "--beta", "line-search shrink factor", [](RunConfig& c, double v) { c.solver.beta = v; });
  bind<double>(sub, inv, "--eta", "barrier growth factor", [](RunConfig& c, double v) { c.solver.eta = v; });
  bind<double>(sub, inv, "--t0", "initial barrier parameter", [](RunConfig& c, double v) { c.solver.t0 = v; });
  bind<double>(sub, inv, "--tmax", "largest barrier parameter", [](RunConfig& c, double v) { c.solver.t_max = v; });
  bind<double>(sub, inv, "--eps", "residual tolerance per barrier stage", [](RunConfig& c, double v) { c.solver.epsilon = v; });
  bind<int>(sub, inv, "--max-newton", "Newton step limit per barrier stage",
            [](RunConfig& c, int v) { c.solver.max_newton_steps = v; });
  bind<bool>(sub, inv, "--unit-first-step", "start each line search at s=1 (true) or s=beta (false)",
             [](RunConfig& c, bool v) { c.solver.unit_first_step = v; });
}

void add_power_flags(CLI::App* sub, Invocation& inv) {
  auto* pt = sub->add_option_function<double>(
      "--pt", [&inv](double v) { inv.overrides.push_back([v](RunConfig& c) { c.total_power = v; }); },
      "total power P_T (linear)");
  auto* pt_db = sub->add_option_function<double>(
      "--pt-db",
      [&inv](double v) { inv.overrides.push_back([v](RunConfig& c) { c.total_power = db_to_linear(v); }); },
      "total power P_T in dB");
  pt->excludes(pt_db);
  auto* pi = sub->add_option_function<std::vector<double>>(
                    "--pi",
                    [&inv](const std::vector<double>& v) {
                      inv.overrides.push_back([v](RunConfig& c) { c.interference_powers = v; });
                    },
                    "interference power P_Ij (linear), once per primary receiver")
                 ->allow_extra_args(false);
  auto* pi_db = sub->add_option_function<std::vector<double>>(
                       "--pi-db",
                       [&inv](const std::vector<double>& v) {
                         std::vector<double> lin;
                         for (double d : v) lin.push_back(db_to_linear(d));
                         inv.overrides.push_back([lin](RunConfig& c) { c.interference_powers = lin; });
                       },
                       "interference power P_Ij in dB, once per primary receiver")
                    ->allow_extra_args(false);
  pi->excludes(pi_db);
}

void add_bisect_flags(CLI::App* sub, Invocation& inv) {
  bind<double>(sub, inv, "--delta", "relative power accuracy of the bisection",
               [](RunConfig& c, double v) { c.delta_power = v; });
  bind<double>(sub, inv, "--eps-rate", "relative rate tolerance of the bisection",
               [](RunConfig& c, double v) { c.epsilon_rate = v; });
}

void add_mc_flags(CLI::App* sub, Invocation& inv, bool with_enable) {
  if (with_enable) {
    sub->add_flag_callback("--mc", [&inv] { inv.overrides.push_back([](RunConfig& c) { c.mc_enabled = true; }); },
                           "add a Monte-Carlo column");
  }
  bind<std::uint64_t>(sub, inv, "--mc-samples", "Monte-Carlo sample count",
                      [](RunConfig& c, std::uint64_t v) { c.mc.samples = v; });
  bind<std::uint64_t>(sub, inv, "--seed", "Monte-Carlo seed", [](RunConfig& c, std::uint64_t v) { c.mc.seed = v; });
  bind<int>(sub, inv, "--refine", "Monte-Carlo local refinement rounds",
            [](RunConfig& c, int v) { c.mc.refine_rounds = v; });
}

CLI::App* add_command(CLI::App& app, Invocation& inv, const std::string& name, const std::string& help) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->callback([&inv, name] { inv.command = name; });
  sub->add_option("channel", inv.channel_path, "channel-spec JSON file");
  sub->add_option("--config", inv.config_path, "reuse the resolved config (and channel) of a run manifest");
  sub->add_option("-o,--out-dir", inv.out_dir, "output directory")->capture_default_str();
  sub->add_option("--name", inv.name, "output file stem (default: command name)");
  sub->add_flag_callback("--bits", [&inv] { inv.overrides.push_back([](RunConfig& c) { c.bits = true; }); },
                         "rate columns of CSV outputs in bits");
  bind<unsigned>(sub, inv, "--threads", "worker threads, 0 = all cores", [](RunConfig& c, unsigned v) { c.threads = v; });
  add_solver_flags(sub, inv);
  add_power_flags(sub, inv);
  return sub;
}

// ---- resolution -----------------------------------------------------------

void resolve_grid(RunConfig& cfg, const Invocation& inv) {
  if (inv.powers) {
    cfg.grid = *inv.powers;
  } else if (inv.powers_db) {
    cfg.grid.clear();
    for (double d : *inv.powers_db) cfg.grid.push_back(db_to_linear(d));
  } else if (inv.from_db || inv.to_db || inv.points || cfg.grid.empty()) {
    const double a = inv.from_db.value_or(0.0);
    const double b = inv.to_db.value_or(20.0);
    const int n = inv.points.value_or(21);
    if (n < 1) throw std::invalid_argument("--points must be >= 1");
    if (n > 1 && !(b > a)) throw std::invalid_argument("--to-db must exceed --from-db");
    cfg.grid.clear();
    for (int i = 0; i < n; ++i) {
      const double db = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
      cfg.grid.push_back(db_to_linear(db));
    }
  }
  for (std::size_t i = 0; i < cfg.grid.size(); ++i) {
    if (!(cfg.grid[i] > 0.0)) throw std::invalid_argument("sweep powers must be positive");
    if (i > 0 && !(cfg.grid[i] > cfg.grid[i - 1])) {
      throw std::invalid_argument("sweep powers must be strictly increasing");
    }
  }
}

ChannelSet apply_powers(ChannelSet ch, RunConfig& cfg) {
  if (cfg.total_power) ch = ch.with_total_power(*cfg.total_power);
  if (cfg.interference_powers) ch = ch.with_interference_powers(*cfg.interference_powers);
  cfg.total_power = ch.total_power();
  cfg.interference_powers = ch.interference_powers();
  return ch;
}

// ---- commands -------------------------------------------------------------

Outcome cmd_capacity(const ChannelSet& ch, const RunConfig& cfg, const fs::path& csv) {
  const SaddleSolution s = solve_saddle(ch, cfg.solver);
  std::ostringstream tr;
  tr << "t,k,residual_norm,step_size,f_value,C_of_R,min_eig_neg_Txx,min_eig_Tyy,rcond\n";
  const double u = rate_unit(cfg);
  for (const NewtonRecord& r : s.trace) {
    tr << num(r.t) << ',' << r.k << ',' << num(r.residual_norm) << ',' << num(r.step_size) << ','
       << num(u * r.f_value) << ',' << num(u * r.c_of_r) << ',' << num(r.min_eig_neg_txx) << ','
       << num(r.min_eig_tyy) << ',' << num(r.rcond) << '\n';
  }
  std::size_t stages = 0;
  for (const NewtonRecord& r : s.trace) stages += r.k == 0 ? 1 : 0;

  std::ostringstream os;
  os << std::setprecision(8);
  const double cap = std::max(0.0, s.f_value);
  os << "capacity      " << cap << " nats (" << to_bits(cap) << " bits)\n"
     << "f(R',K')      " << s.f_value << "\n"
     << "C(R')         " << s.c_of_r << "\n"
     << "gap_bound     " << s.gap_bound << "\n"
     << "t_final       " << s.t_final << "\n"
     << "newton_steps  " << s.trace.size() - stages << " over " << stages << " barrier stages\n";
  print_matrix(os, "R'", s.r_prime.matrix());
  print_matrix(os, "K'", s.k_prime.K());
  if (singular_case_hint(ch, s)) {
    os << "hint          TPC slack and singular active-IPC Gram sum: C(R') may fall short of the\n"
       << "              capacity; the covariance command recovers an optimal covariance\n";
  }
  os << "trace         " << csv.string() << "\n";
  return {os.str(), {{csv, tr.str()}}, kExitOk};
}

Outcome cmd_covariance(const ChannelSet& ch, const RunConfig& cfg, const fs::path& csv) {
  const CovarianceSolution s = solve_covariance(ch, cfg.bisect());
  std::ostringstream tr;
  tr << "k,P_min,P_max,P,f_value,C_of_R\n";
  const double u = rate_unit(cfg);
  for (const BisectRecord& r : s.bisect_trace) {
    tr << r.k << ',' << num(r.p_min) << ',' << num(r.p_max) << ',' << num(r.p) << ',' << num(u * r.f_value)
       << ',' << num(u * r.c_of_r) << '\n';
  }
  std::ostringstream os;
  os << std::setprecision(8);
  os << "C_capacity    " << s.c_capacity << " nats (" << to_bits(s.c_capacity) << " bits)\n"
     << "C_achieved    " << s.c_achieved << " nats (" << to_bits(s.c_achieved) << " bits)\n"
     << "delta_C       " << s.delta_c << "\n"
     << "P_T_min       " << s.p_t_min << " (" << (s.p_t_min > 0.0 ? linear_to_db(s.p_t_min) : -INFINITY)
     << " dB)\n"
     << "delta_P       " << s.delta_p << "\n"
     << "final_power   " << s.final_power << "\n"
     << "bisect_steps  " << s.bisect_trace.size() << "\n";
  if (s.zero_capacity) os << "zero capacity: f(R',K') at P_T is within its gap bound of 0\n";
  print_matrix(os, "R*", s.r_star.matrix());
  os << "trace         " << csv.string() << "\n";
  return {os.str(), {{csv, tr.str()}}, kExitOk};
}

struct SweepRow {
  double power = 0.0;
  std::optional<double> f, c, gap, alg2, mc;
  std::string status = "ok";
};

Outcome cmd_sweep(const ChannelSet& ch, const RunConfig& cfg, const fs::path& csv) {
  std::vector<SweepRow> rows(cfg.grid.size());
  parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.power = cfg.grid[i];
    const ChannelSet cp = ch.with_total_power(row.power);
    try {
      const SaddleSolution s = solve_saddle(cp, cfg.solver);
      row.f = s.f_value;
      row.c = s.c_of_r;
      row.gap = s.gap_bound;
    } catch (const Error& e) {
      row.status = std::string("alg1 failed: ") + e.what();
      return;
    }
    try {
      row.alg2 = solve_covariance(cp, cfg.bisect()).c_achieved;
    } catch (const Error& e) {
      row.status = std::string("alg2 failed: ") + e.what();
    }
    if (cfg.mc_enabled) {
      McConfig mc = cfg.mc;
      mc.threads = 1;
      row.mc = mc_search(cp, mc).best_rate;
    }
  });

  std::ostringstream tr;
  tr << "P_T,P_T_dB,f_value,C_of_R,gap_bound,C_alg2,MC_rate,status\n";
  std::size_t ok = 0;
  const double u = rate_unit(cfg);
  for (const SweepRow& r : rows) {
    ok += r.f ? 1 : 0;
    tr << num(r.power) << ',' << num(linear_to_db(r.power)) << ',' << cell(scaled(r.f, u)) << ','
       << cell(scaled(r.c, u)) << ',' << cell(scaled(r.gap, u)) << ',' << cell(scaled(r.alg2, u)) << ','
       << cell(scaled(r.mc, u)) << ',' << csv_escape(r.status) << '\n';
  }
  std::ostringstream os;
  os << "points        " << rows.size() << " (" << ok << " solved)\n"
     << "sweep         " << csv.string() << "\n";
  return {os.str(), {{csv, tr.str()}}, ok > 0 ? kExitOk : kExitSolver};
}

Outcome cmd_validate(const ChannelSet& ch, const RunConfig& cfg, const fs::path& csv) {
  const std::vector<CheckResult> checks = run_validation(ch, cfg);
  std::ostringstream tr;
  tr << "check,status,measured,threshold,detail\n";
  std::ostringstream os;
  os << std::left << std::setw(22) << "check" << std::setw(8) << "status" << std::setw(14) << "measured"
     << std::setw(14) << "threshold" << "detail\n";
  bool all = true;
  for (const CheckResult& c : checks) {
    all = all && c.passed;
    const char* st = c.passed ? "pass" : "FAIL";
    tr << c.name << ',' << st << ',' << num(c.measured) << ',' << num(c.threshold) << ',' << csv_escape(c.detail)
       << '\n';
    os << std::setw(22) << c.name << std::setw(8) << st << std::setw(14) << std::setprecision(4) << c.measured
       << std::setw(14) << c.threshold << c.detail << "\n";
  }
  os << (all ? "all checks passed\n" : "validation FAILED\n");
  return {os.str(), {{csv, tr.str()}}, all ? kExitOk : kExitValidate};
}

}  // namespace

bool singular_case_hint(const ChannelSet& ch, const SaddleSolution& s) {
  constexpr double kRel = 1e-3;
  const Matrix& r = s.r_prime.matrix();
  if (!(ch.total_power() - r.trace() > kRel * ch.total_power())) return false;
  Matrix gram = Matrix::Zero(ch.m(), ch.m());
  bool any = false;
  for (std::size_t j = 0; j < ch.pr_count(); ++j) {
    const double slack = ch.interference_power(j) - ch.W3(j).cwiseProduct(r).sum();
    if (slack <= kRel * ch.interference_power(j)) {
      gram += ch.W3(j);
      any = true;
    }
  }
  if (!any) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(gram), Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return ev(0) <= 1e-9 * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

namespace {

void emit_error(std::ostream& err, const char* kind, const std::string& msg, int code) {
  err << json{{"error", kind}, {"message", msg}, {"exit_code", code}}.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  Invocation inv;
  CLI::App app{"Secrecy capacity of MIMO wiretap channels under power and interference constraints"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  add_command(app, inv, "capacity", "saddle-point solve: capacity, R', K' and Newton trace");

  CLI::App* cov = add_command(app, inv, "covariance", "capacity-achieving covariance via power bisection");
  add_bisect_flags(cov, inv);

  CLI::App* sweep = add_command(app, inv, "sweep", "capacity versus total power");
  add_bisect_flags(sweep, inv);
  add_mc_flags(sweep, inv, true);
  sweep->add_option_function<double>("--from-db", [&inv](double v) { inv.from_db = v; }, "first grid power in dB (0)");
  sweep->add_option_function<double>("--to-db", [&inv](double v) { inv.to_db = v; }, "last grid power in dB (20)");
  sweep->add_option_function<int>("--points", [&inv](int v) { inv.points = v; }, "grid points (21)");
  auto* pw = sweep->add_option_function<std::vector<double>>(
      "--powers", [&inv](const std::vector<double>& v) { inv.powers = v; }, "explicit linear grid");
  auto* pwdb = sweep->add_option_function<std::vector<double>>(
      "--powers-db", [&inv](const std::vector<double>& v) { inv.powers_db = v; }, "explicit grid in dB");
  pw->excludes(pwdb);

  CLI::App* val = add_command(app, inv, "validate", "derivative, definiteness, saddle and Monte-Carlo checks");
  add_mc_flags(val, inv, false);
  bind<int>(val, inv, "--fd-points", "random points for finite-difference checks",
            [](RunConfig& c, int v) { c.validate.fd_points = v; });
  bind<std::uint64_t>(val, inv, "--check-seed", "seed of the check points",
                      [](RunConfig& c, std::uint64_t v) { c.validate.seed = v; });
  bind<double>(val, inv, "--saddle-tmax", "barrier limit of the reference solve",
               [](RunConfig& c, double v) { c.validate.saddle_t_max = v; });
  bind<double>(val, inv, "--saddle-eps", "residual target of the reference solve",
               [](RunConfig& c, double v) { c.validate.saddle_epsilon = v; });
  bind<int>(val, inv, "--saddle-points", "random perturbations per saddle check",
            [](RunConfig& c, int v) { c.validate.saddle_points = v; });
  bind<double>(val, inv, "--mc-slack", "allowed f - MC_rate", [](RunConfig& c, double v) { c.validate.mc_slack = v; });
  bind<double>(val, inv, "--inject-txy-scale", "", [](RunConfig& c, double v) { c.validate.txy_scale = v; });
  val->get_option("--inject-txy-scale")->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    emit_error(err, "usage", e.what(), kExitParse);
    return kExitParse;
  }

  RunConfig cfg;
  try {
    if (!inv.config_path.empty()) {
      RunManifest m = read_manifest(inv.config_path);
      merge_json(cfg, m.config);
      if (inv.channel_path.empty()) inv.channel_path = m.channel_path;
    }
    if (inv.channel_path.empty()) throw ParseError("no channel file given");
    for (const Override& o : inv.overrides) o(cfg);
    if (inv.command == "sweep") resolve_grid(cfg, inv);
    cfg.bisect().validate();
    cfg.mc.validate();

    ChannelSet ch = apply_powers(load_channel_file(inv.channel_path), cfg);

    const std::string stem = inv.name.empty() ? inv.command : inv.name;
    const fs::path csv = fs::path(inv.out_dir) / (stem + ".csv");
    const fs::path manifest_path = fs::path(inv.out_dir) / (stem + "_manifest.json");

    Outcome res;
    try {
      if (inv.command == "capacity") {
        res = cmd_capacity(ch, cfg, csv);
      } else if (inv.command == "covariance") {
        res = cmd_covariance(ch, cfg, csv);
      } else if (inv.command == "sweep") {
        res = cmd_sweep(ch, cfg, csv);
      } else {
        res = cmd_validate(ch, cfg, csv);
      }
    } catch (const SolverError& e) {
      emit_error(err, "solver", e.what(), kExitSolver);
      return kExitSolver;
    } catch (const DomainError& e) {
      emit_error(err, "solver", e.what(), kExitSolver);
      return kExitSolver;
    }

    RunManifest manifest;
    manifest.command = inv.command;
    manifest.channel_path = inv.channel_path;
    manifest.config = to_json(cfg);
    for (const auto& f : res.files) {
      write_file_atomic(f.first, f.second);
      manifest.outputs.push_back(f.first.string());
    }
    manifest.outputs.push_back(manifest_path.string());
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file_atomic(manifest_path, to_json(manifest).dump(2) + "\n");

    out << res.report;
    if (res.exit_code == kExitSolver) emit_error(err, "solver", "no sweep point could be solved", kExitSolver);
    return res.exit_code;
  } catch (const ParseError& e) {
    emit_error(err, "parse", e.what(), kExitParse);
    return kExitParse;
  } catch (const DimensionError& e) {
    emit_error(err, "parse", e.what(), kExitParse);
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    emit_error(err, "parse", e.what(), kExitParse);
    return kExitParse;
  } catch (const Error& e) {
    emit_error(err, "solver", e.what(), kExitSolver);
    return kExitSolver;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), kExitInternal);
    return kExitInternal;
  }
}

}  // namespace wtcap::cli
