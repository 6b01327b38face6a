#include "asmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "asmc/error.hpp"

namespace asmc {

namespace fs = std::filesystem;

std::string version_string() { return ASMC_VERSION_STRING; }

Json to_json(const RunConfig& cfg) {
  Json j;
  j["potential"] = cfg.potential;
  j["params"] = Json(cfg.potential_params);
  j["eta"] = cfg.eta ? Json(*cfg.eta) : Json();
  j["eta1"] = cfg.eta1;
  j["delta"] = cfg.delta;
  j["theta"] = cfg.theta;
  j["alpha"] = cfg.alpha;
  j["nu"] = cfg.nu;
  j["c_n"] = cfg.c_n;
  j["c_t"] = cfg.c_t;
  j["c_tem"] = cfg.c_tem;
  j["budget_cap"] = cfg.budget_cap;
  j["dt"] = cfg.dt;
  j["guard_radius"] = cfg.guard_radius;
  j["integrator"] = to_string(cfg.integrator);
  j["n"] = cfg.n ? Json(*cfg.n) : Json();
  j["m"] = cfg.m ? Json(*cfg.m) : Json();
  j["t"] = cfg.t ? Json(*cfg.t) : Json();
  j["unsafe"] = cfg.unsafe;
  j["seed"] = cfg.seed;
  j["c_ini"] = cfg.c_ini;
  j["init"] = to_string(cfg.init);
  j["resampler"] = to_string(cfg.resampler);
  j["config_hash"] = hex_hash(config_hash(cfg));
  return j;
}

Json to_json(const Plan& plan) {
  Json j;
  j["m"] = plan.m;
  j["n"] = plan.n;
  j["t"] = plan.t;
  j["eta"] = plan.inputs.eta;
  j["eta1"] = plan.inputs.eta1;
  j["delta"] = plan.inputs.delta;
  j["theta"] = plan.inputs.theta;
  j["alpha"] = plan.inputs.alpha;
  j["nu"] = plan.inputs.nu;
  j["barrier_ratio"] = plan.inputs.barrier_ratio;
  j["c_k"] = plan.inputs.c_k;
  j["constants"] = {{"c_n", plan.inputs.constants.c_n},
                    {"c_t", plan.inputs.constants.c_t},
                    {"c_tem", plan.inputs.constants.c_tem}};
  j["dt"] = plan.inputs.dt;
  j["eta_cr"] = plan.eta_cr;
  j["k_cr"] = plan.k_cr;
  j["levels"] = plan.schedule.levels;
  j["degenerate_schedule"] = plan.schedule.degenerate;
  j["step_budget"] = plan.step_budget();
  j["work"] = plan.work();
  j["violated_bounds"] = violated_bounds(plan);
  return j;
}

Json to_json(const LandscapeSummary& ls) {
  Json j;
  j["potential"] = ls.potential->id();
  Json minima = Json::array();
  for (const auto& m : ls.potential->minima()) minima.push_back({{"location", m.location}, {"energy", m.energy}});
  j["minima"] = minima;
  Json saddles = Json::array();
  for (const auto& s : ls.saddles) {
    saddles.push_back({{"from", s.from + 1}, {"to", s.to + 1}, {"location", s.location}, {"energy", s.energy}});
  }
  j["saddles"] = saddles;
  j["saddle_height"] = ls.saddle_height;
  j["energy_barrier"] = ls.energy_barrier;
  j["barrier_ratio"] = ls.barrier_ratio;
  j["alpha"] = ls.alpha;
  j["b_threshold"] = ls.b_threshold;
  j["c_k"] = ls.c_k;
  j["laplacian_bound"] = ls.potential->laplacian_bound();
  j["gradient_liminf"] = ls.potential->gradient_liminf();
  return j;
}

Json to_json(const LevelRecord& rec) {
  Json j;
  j["level"] = rec.level;
  j["eta"] = rec.eta;
  j["ess"] = rec.ess;
  j["basin_fraction"] = rec.basin_fraction;
  j["in_k_fraction"] = std::isnan(rec.in_k_fraction) ? Json() : Json(rec.in_k_fraction);
  j["offspring_histogram"] = rec.offspring_histogram;
  j["resample_max_count"] = rec.resample_max_count;
  j["wall_ms"] = rec.wall_ms;
  return j;
}

Json to_json(const CoverageReport& report) {
  Json j;
  j["runs"] = report.runs.size();
  j["delta"] = report.delta;
  j["theta"] = report.theta;
  j["success_fraction"] = report.success_fraction;
  j["threshold"] = report.threshold;
  j["pass"] = report.pass;
  Json rows = Json::array();
  for (const auto& r : report.runs) rows.push_back({{"seed", r.seed}, {"error", r.error}, {"success", r.success}});
  j["per_run"] = rows;
  return j;
}

Json to_json(const ComplexityTable& table) {
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    Json row{{"eta", r.eta}, {"feasible", r.feasible}};
    if (r.feasible) {
      row["m"] = r.m;
      row["n"] = r.n;
      row["t"] = r.t;
      row["work"] = r.work;
    } else {
      row["note"] = r.note;
    }
    if (r.lambda2 > 0.0) row["lambda2"] = r.lambda2;
    rows.push_back(row);
  }
  return {{"rows", rows}, {"budget_slope", table.budget_slope}, {"spectral_slope", table.spectral_slope},
          {"n_delta_slope", table.n_delta_slope}, {"n_theta_slope", table.n_theta_slope}};
}

Json to_json(const GibbsReference& ref) {
  Json j;
  j["kind"] = "gibbs";
  j["eps"] = ref.eps;
  j["box"] = {{"lo", ref.box.lo}, {"hi", ref.box.hi}};
  j["z"] = ref.z;
  j["well_masses"] = ref.well_masses;
  j["b_masses"] = ref.b_masses;
  j["mass_outside_k"] = ref.mass_outside_k;
  j["c_m"] = ref.c_m;
  j["refinement_change"] = ref.refinement_change;
  j["nodes"] = ref.nodes;
  j["density"] = ref.density;
  return j;
}

Json to_json(const SpectralSummary& s) {
  Json j;
  j["kind"] = "spectral";
  j["eps"] = s.eps;
  j["dim"] = s.dim;
  j["box"] = {{"lo", s.box.lo}, {"hi", s.box.hi}};
  j["cells"] = s.cells;
  j["eigenvalues"] = s.eigenvalues;
  j["wells"] = s.wells;
  j["gap"] = s.gap;
  j["basin_mass"] = s.basin_mass;
  j["coefficients"] = s.coefficients;
  j["c_psi"] = s.c_psi;
  j["boundary_mass"] = s.boundary_mass;
  j["cell_mass"] = s.cell_mass;
  j["psi2"] = s.psi2();
  return j;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  out << text;
}

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("io_error", "cannot write " + path.string());
  return out;
}

}  // namespace

void write_samples_csv(const fs::path& path, std::span<const double> samples, std::size_t dim, std::uint64_t hash) {
  auto out = open_for_write(path);
  out << "# config_hash: " << hex_hash(hash) << "\n";
  for (std::size_t j = 0; j < dim; ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << "\n";
  const std::size_t n = samples.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) out << (j ? "," : "") << format_value(samples[i * dim + j]);
    out << "\n";
  }
}

void write_coverage_csv(const fs::path& path, const CoverageReport& report) {
  auto out = open_for_write(path);
  out << "seed,error,success\n";
  for (const auto& r : report.runs) out << r.seed << "," << format_value(r.error) << "," << (r.success ? 1 : 0) << "\n";
}

TraceWriter::TraceWriter(const fs::path& path, std::size_t wells, std::uint64_t hash)
    : out_(open_for_write(path)), wells_(wells) {
  out_ << "# config_hash: " << hex_hash(hash) << "\n";
  out_ << "level,eta,ess";
  for (std::size_t i = 0; i < wells_; ++i) out_ << ",frac_basin_" << (i + 1);
  out_ << ",frac_in_K,resample_max_count,wall_ms\n";
  out_.flush();
}

void TraceWriter::write(const LevelRecord& rec) {
  out_ << rec.level << "," << format_value(rec.eta) << "," << format_value(rec.ess);
  for (std::size_t i = 0; i < wells_; ++i) {
    out_ << "," << (i < rec.basin_fraction.size() ? format_value(rec.basin_fraction[i]) : "nan");
  }
  out_ << "," << (std::isnan(rec.in_k_fraction) ? std::string("nan") : format_value(rec.in_k_fraction)) << ","
       << rec.resample_max_count << "," << format_value(rec.wall_ms) << "\n";
  out_.flush();
}

std::string eps_label(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", eps);
  return buf;
}

fs::path fixture_dir(const fs::path& root, const std::string& potential, double eps) {
  return root / potential / eps_label(eps);
}

void write_fixture(const fs::path& path, Json doc, std::uint64_t hash) {
  doc["config_hash"] = hex_hash(hash);
  doc["version"] = version_string();
  write_text_file(path, doc.dump(1) + "\n");
}

Json load_fixture(const fs::path& path, std::uint64_t expected_hash) {
  if (!fs::exists(path)) {
    throw FixtureError("missing fixture " + path.string() + "; generate it with the oracle subcommand");
  }
  Json doc;
  try {
    doc = Json::parse(read_text_file(path));
  } catch (const Json::exception& e) {
    throw FixtureError("unreadable fixture " + path.string() + ": " + e.what());
  }
  const std::string want = hex_hash(expected_hash);
  const std::string got = doc.value("config_hash", std::string());
  if (got != want) {
    throw FixtureError("stale fixture " + path.string() + ": config hash " + got + " does not match " + want);
  }
  return doc;
}

}  // namespace asmc
