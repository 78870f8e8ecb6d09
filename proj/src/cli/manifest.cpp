#include <fstream>
#include <sstream>
#include <system_error>

#include "wtcap/cli.hpp"
#include "wtcap/error.hpp"

namespace wtcap::cli {
namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& obj, const char* key, T& target) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  try {
    target = it->get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config field '") + key + "': " + e.what());
  }
}

const json* section(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return nullptr;
  if (!it->is_object()) throw ParseError(std::string("config section '") + key + "' must be an object");
  return &*it;
}

}  // namespace

json to_json(const RunConfig& cfg) {
  const SolverConfig& s = cfg.solver;
  const ValidateOptions& v = cfg.validate;
  json j;
  j["solver"] = {{"alpha", s.alpha},
                 {"beta", s.beta},
                 {"eta", s.eta},
                 {"t0", s.t0},
                 {"t_max", s.t_max},
                 {"epsilon", s.epsilon},
                 {"max_newton_steps", s.max_newton_steps},
                 {"max_backtrack_steps", s.max_backtrack_steps},
                 {"low_rank_threshold", s.low_rank_threshold},
                 {"unit_first_step", s.unit_first_step}};
  j["bisect"] = {{"epsilon_rate", cfg.epsilon_rate}, {"delta_power", cfg.delta_power}};
  j["mc"] = {{"enabled", cfg.mc_enabled},
             {"samples", cfg.mc.samples},
             {"seed", cfg.mc.seed},
             {"refine_rounds", cfg.mc.refine_rounds}};
  j["P_T"] = cfg.total_power ? json(*cfg.total_power) : json(nullptr);
  j["P_I"] = cfg.interference_powers ? json(*cfg.interference_powers) : json(nullptr);
  j["grid"] = cfg.grid;
  j["validate"] = {{"fd_points", v.fd_points},
                   {"seed", v.seed},
                   {"grad_tol", v.grad_tol},
                   {"hess_tol", v.hess_tol},
                   {"saddle_t_max", v.saddle_t_max},
                   {"saddle_epsilon", v.saddle_epsilon},
                   {"saddle_points", v.saddle_points},
                   {"saddle_radius", v.saddle_radius},
                   {"saddle_tol", v.saddle_tol},
                   {"mc_upper_tol", v.mc_upper_tol},
                   {"mc_slack", v.mc_slack},
                   {"txy_scale", v.txy_scale}};
  j["threads"] = cfg.threads;
  j["bits"] = cfg.bits;
  return j;
}

void merge_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  if (const json* s = section(j, "solver")) {
    SolverConfig& c = cfg.solver;
    read_field(*s, "alpha", c.alpha);
    read_field(*s, "beta", c.beta);
    read_field(*s, "eta", c.eta);
    read_field(*s, "t0", c.t0);
    read_field(*s, "t_max", c.t_max);
    read_field(*s, "epsilon", c.epsilon);
    read_field(*s, "max_newton_steps", c.max_newton_steps);
    read_field(*s, "max_backtrack_steps", c.max_backtrack_steps);
    read_field(*s, "low_rank_threshold", c.low_rank_threshold);
    read_field(*s, "unit_first_step", c.unit_first_step);
  }
  if (const json* b = section(j, "bisect")) {
    read_field(*b, "epsilon_rate", cfg.epsilon_rate);
    read_field(*b, "delta_power", cfg.delta_power);
  }
  if (const json* m = section(j, "mc")) {
    read_field(*m, "enabled", cfg.mc_enabled);
    read_field(*m, "samples", cfg.mc.samples);
    read_field(*m, "seed", cfg.mc.seed);
    read_field(*m, "refine_rounds", cfg.mc.refine_rounds);
  }
  if (j.contains("P_T") && !j["P_T"].is_null()) {
    double p = 0.0;
    read_field(j, "P_T", p);
    cfg.total_power = p;
  }
  if (j.contains("P_I") && !j["P_I"].is_null()) {
    std::vector<double> p;
    read_field(j, "P_I", p);
    cfg.interference_powers = std::move(p);
  }
  read_field(j, "grid", cfg.grid);
  if (const json* v = section(j, "validate")) {
    ValidateOptions& o = cfg.validate;
    read_field(*v, "fd_points", o.fd_points);
    read_field(*v, "seed", o.seed);
    read_field(*v, "grad_tol", o.grad_tol);
    read_field(*v, "hess_tol", o.hess_tol);
    read_field(*v, "saddle_t_max", o.saddle_t_max);
    read_field(*v, "saddle_epsilon", o.saddle_epsilon);
    read_field(*v, "saddle_points", o.saddle_points);
    read_field(*v, "saddle_radius", o.saddle_radius);
    read_field(*v, "saddle_tol", o.saddle_tol);
    read_field(*v, "mc_upper_tol", o.mc_upper_tol);
    read_field(*v, "mc_slack", o.mc_slack);
    read_field(*v, "txy_scale", o.txy_scale);
  }
  read_field(j, "threads", cfg.threads);
  read_field(j, "bits", cfg.bits);
}

json to_json(const RunManifest& m) {
  return json{{"command", m.command},
              {"channel", m.channel_path},
              {"config", m.config},
              {"outputs", m.outputs},
              {"version", m.version},
              {"wall_seconds", m.wall_seconds}};
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open manifest: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("manifest must be a JSON object");
  RunManifest m;
  read_field(j, "command", m.command);
  read_field(j, "channel", m.channel_path);
  read_field(j, "outputs", m.outputs);
  read_field(j, "version", m.version);
  read_field(j, "wall_seconds", m.wall_seconds);
  if (auto it = j.find("config"); it != j.end()) m.config = *it;
  return m;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace wtcap::cli
