#ifndef ASMC_IO_HPP
#define ASMC_IO_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>

#include <json.hpp>

#include "asmc/config.hpp"
#include "asmc/diagnostics.hpp"
#include "asmc/oracle.hpp"
#include "asmc/schedule.hpp"
#include "asmc/smc.hpp"

namespace asmc {

using Json = nlohmann::ordered_json;

std::string version_string();

Json to_json(const RunConfig& cfg);
Json to_json(const Plan& plan);
Json to_json(const LandscapeSummary& landscape);
Json to_json(const LevelRecord& rec);
Json to_json(const CoverageReport& report);
Json to_json(const ComplexityTable& table);
Json to_json(const GibbsReference& ref);
Json to_json(const SpectralSummary& summary);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// "# config_hash: <hex>" followed by one row per particle.
void write_samples_csv(const std::filesystem::path& path, std::span<const double> samples, std::size_t dim,
                       std::uint64_t hash);

/// Columns seed, error, success; one row per run.
void write_coverage_csv(const std::filesystem::path& path, const CoverageReport& report);

/// Streams trace rows (level, eta, ess, frac_basin_1..J, frac_in_K,
/// resample_max_count, wall_ms) to disk as levels complete.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, std::size_t wells, std::uint64_t hash);
  void write(const LevelRecord& rec);

 private:
  std::ofstream out_;
  std::size_t wells_;
};

/// fixtures/<potential>/<eps>/
std::filesystem::path fixture_dir(const std::filesystem::path& root, const std::string& potential, double eps);
std::string eps_label(double eps);

/// Writes the document with `config_hash` set.
void write_fixture(const std::filesystem::path& path, Json doc, std::uint64_t hash);
/// Reads a fixture and checks its hash. Throws FixtureError when the file is
/// missing, unreadable or was produced for a different configuration.
Json load_fixture(const std::filesystem::path& path, std::uint64_t expected_hash);

}  // namespace asmc

#endif  // ASMC_IO_HPP
