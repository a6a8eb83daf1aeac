#pragma once

// Scenario files, runs and reports for the qdb-run command line tool.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdb/classical_ou.hpp"
#include "qdb/gaussian.hpp"
#include "qdb/lindblad.hpp"

namespace qdb::tools {

enum class ScenarioKind { FiniteLindblad, Gds, ClassicalOu, CrossValidate };

const char* to_string(ScenarioKind k);

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 1.0;
  int n_points = 2;

  std::vector<double> points() const;
};

/// Gaussian initial state: explicit moments, or `stationary_scale` times the
/// stationary covariance (with the stationary mean).
struct GaussianInitial {
  RVector mean;
  RMatrix covariance;
  std::optional<double> stationary_scale;
};

struct GdsSpec {
  Index n_modes = 1;
  RMatrix b_matrix;
  RVector xi;
  std::vector<CVector> lindblad_vectors;
};

struct FiniteSpec {
  CMatrix hamiltonian;
  std::vector<CMatrix> lindblad_operators;
  CMatrix initial_density;
};

struct OuSpec {
  RMatrix drift;
  RMatrix noise;
  RVector offset;
  Index mc_paths = 0;  ///< 0 disables the Monte Carlo check
  double mc_step = 1e-3;
};

/// Optional scenario-specific assertions.
struct Expectations {
  bool psi_zero = false;
  bool reaches_stationary = false;
};

struct ScenarioConfig {
  std::string name;
  ScenarioKind kind = ScenarioKind::Gds;
  double hbar = 1.0;
  TimeGrid time_grid;
  std::optional<double> fd_step;
  std::uint64_t seed = 1;
  std::string output_path;
  Index cutoff = 40;

  GdsSpec gds;
  GaussianInitial gaussian_initial;
  FiniteSpec finite;
  OuSpec ou;
  Expectations expect;
};

/// Every schema problem found while loading, one per line, with key paths.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Parses and validates a scenario file. In strict mode unknown keys are
/// errors; otherwise they are returned through `warnings`.
ScenarioConfig load_config(const std::filesystem::path& path, bool strict = false,
                           std::vector<std::string>* warnings = nullptr);
ScenarioConfig parse_config(const std::string& text, const std::string& origin, bool strict = false,
                            std::vector<std::string>* warnings = nullptr);

struct IdentityResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_error <= tolerance; }
};

struct RunReport {
  std::string scenario;
  ScenarioKind kind = ScenarioKind::Gds;
  std::string version;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<IdentityResult> identities;
  std::vector<std::string> notes;
  double wall_seconds = 0.0;  ///< console only; not part of the emitted files

  bool passed() const;
};

struct RunOverrides {
  std::optional<double> fd_step;
  std::optional<Index> cutoff;
  std::optional<std::uint64_t> seed;
};

/// Throws qdb::Error subclasses from the library on numerical or domain
/// failures; identity failures are recorded in the report instead.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOverrides& overrides = {});

/// `.` decimal point, `,` separator, 17 significant digits, LF endings.
std::string format_csv(const RunReport& r);
/// Header plus one PASS/FAIL line per identity.
std::string format_text(const RunReport& r);

/// Writes <dir>/<stem>.csv and <dir>/<stem>.txt. Throws std::runtime_error
/// when a file cannot be written.
void emit_report(const RunReport& r, const std::filesystem::path& dir, const std::string& stem);

}  // namespace qdb::tools
