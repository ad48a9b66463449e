#ifndef RDREAM_SIMULATION_HPP
#define RDREAM_SIMULATION_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rdream/test_statistic.hpp"
#include "rdream/types.hpp"

namespace rdream {

enum class Family { H11, H12, H13, H14, H21, H22, H23, H31 };
enum class ErrorDist { StdNormal, StdLogNormal };

// Response-replacement models used by the contamination schemes.
enum class ReplacementModel {
  CosineRidge,  // y = 5.5 cos(3 pi b1'x) + eps
  ExpValley,    // y = 6 exp(-|b'x|) + eps
};

struct ContaminationSpec {
  enum class Kind { None, AddConstant, ReplaceByModel };
  Kind kind = Kind::None;
  double value = 0.0;  // AddConstant offset
  ReplacementModel model = ReplacementModel::CosineRidge;
  double rate = 0.0;  // fraction of responses touched, in [0, 0.5]

  static ContaminationSpec none() { return {}; }
  static ContaminationSpec add_constant(double value, double rate);
  static ContaminationSpec replace_by_model(ReplacementModel m, double rate);
};

struct ScenarioSpec {
  Family family = Family::H11;
  double a = 0.0;  // departure from the null; 0 is the null itself
  Index n = 100;
  int p = 0;  // 0 selects the family default dimension
  ErrorDist error = ErrorDist::StdNormal;
  ContaminationSpec contamination;
  double lognormal_sigma2 = 0.0625;  // ln-scale variance of the heavy error

  int dimension() const;  // p, resolved
};

struct GroundTruth {
  Matrix b_true;  // p x q_true
  int q_true = 1;
};

int default_dimension(Family f);
ContaminationSpec default_contamination(Family f);
LinkSpec link_for_family(Family f);

// Conditional mean of the family at departure a and index values
// u1 = b1'x (and u2 = b2'x for the two-index families, ignored otherwise).
double scenario_mean(Family f, double a, double u1, double u2);

std::string family_name(Family f);
Family parse_family(const std::string& name);
std::string error_name(ErrorDist e);
ErrorDist parse_error(const std::string& name);

// Canonical cell key (method excluded) and its FNV-1a hash; the hash feeds
// the per-replication seed derivation.
std::string scenario_key(const ScenarioSpec& s);
std::uint64_t scenario_cell_hash(const ScenarioSpec& s);

// Draws X ~ N(0, I_p), builds the family's response at departure a, applies
// the error distribution and finally the contamination. Draw order is
// fixed: X row by row, then the n errors, then the contaminated index set,
// then one fresh error per replaced response (indices ascending).
std::pair<Dataset, GroundTruth> generate_scenario(const ScenarioSpec& spec,
                                                  std::uint64_t seed);

struct PowerCell {
  ScenarioSpec scenario;
  TestMethod method = TestMethod::Opg;
  double rejection_rate = 0.0;
  int reps = 0;
  int failures = 0;
  bool invalid = false;  // failures reached 1% of reps
};

struct PowerTable {
  std::vector<PowerCell> cells;
  double alpha = 0.05;
  int reps = 0;
  std::uint64_t seed_base = 0;
};

// Replication r of a cell uses derive_seed(seed_base, cell_hash, r); every
// method sees the same generated data. Replications run in parallel but
// are reduced in index order, so the result does not depend on threads.
PowerTable run_monte_carlo(const std::vector<ScenarioSpec>& grid,
                           const std::vector<TestMethod>& methods, int reps,
                           double alpha, std::uint64_t seed_base,
                           int threads = 1);

enum class ReportFormat { Csv, Json };

void emit_report(const PowerTable& table, ReportFormat format,
                 const std::string& path);
PowerTable parse_report(const std::string& path, ReportFormat format);

}  // namespace rdream

#endif  // RDREAM_SIMULATION_HPP
