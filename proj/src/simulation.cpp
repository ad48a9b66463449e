#include "rdream/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

#include "rdream/baselines.hpp"
#include "rdream/chi_square.hpp"
#include "rdream/rng.hpp"

namespace rdream {

ContaminationSpec ContaminationSpec::add_constant(double value, double rate) {
  ContaminationSpec s;
  s.kind = Kind::AddConstant;
  s.value = value;
  s.rate = rate;
  return s;
}

ContaminationSpec ContaminationSpec::replace_by_model(ReplacementModel m,
                                                      double rate) {
  ContaminationSpec s;
  s.kind = Kind::ReplaceByModel;
  s.model = m;
  s.rate = rate;
  return s;
}

int default_dimension(Family f) {
  switch (f) {
    case Family::H11:
    case Family::H12:
    case Family::H13:
    case Family::H14:
    case Family::H31:
      return 8;
    case Family::H21:
    case Family::H22:
    case Family::H23:
      return 4;
  }
  return 8;
}

ContaminationSpec default_contamination(Family f) {
  switch (f) {
    case Family::H11:
    case Family::H12:
    case Family::H13:
    case Family::H14:
      return ContaminationSpec::add_constant(5.0, 0.10);
    case Family::H21:
    case Family::H22:
    case Family::H23:
      return ContaminationSpec::replace_by_model(ReplacementModel::CosineRidge,
                                                 0.10);
    case Family::H31:
      return ContaminationSpec::none();
  }
  return ContaminationSpec::none();
}

LinkSpec link_for_family(Family f) {
  if (f == Family::H14) return LinkSpec::scaled_exp(2.5, 0.5);
  return LinkSpec::linear();
}

int ScenarioSpec::dimension() const {
  return p > 0 ? p : default_dimension(family);
}

std::string family_name(Family f) {
  switch (f) {
    case Family::H11: return "H11";
    case Family::H12: return "H12";
    case Family::H13: return "H13";
    case Family::H14: return "H14";
    case Family::H21: return "H21";
    case Family::H22: return "H22";
    case Family::H23: return "H23";
    case Family::H31: return "H31";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  for (Family f : {Family::H11, Family::H12, Family::H13, Family::H14,
                   Family::H21, Family::H22, Family::H23, Family::H31}) {
    if (family_name(f) == name) return f;
  }
  throw Error("unknown scenario family: " + name);
}

std::string error_name(ErrorDist e) {
  return e == ErrorDist::StdNormal ? "normal" : "lognormal";
}

ErrorDist parse_error(const std::string& name) {
  if (name == "normal") return ErrorDist::StdNormal;
  if (name == "lognormal") return ErrorDist::StdLogNormal;
  throw Error("unknown error distribution: " + name);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string contamination_key(const ContaminationSpec& c) {
  switch (c.kind) {
    case ContaminationSpec::Kind::None:
      return "none";
    case ContaminationSpec::Kind::AddConstant:
      return "add:" + format_double(c.value) + ":" + format_double(c.rate);
    case ContaminationSpec::Kind::ReplaceByModel:
      return std::string("replace:") +
             (c.model == ReplacementModel::CosineRidge ? "cos" : "expv") + ":" +
             format_double(c.rate);
  }
  return "none";
}

// Direction vectors of the scenario families.
Vector ones_direction(int p) {
  return Vector::Constant(p, 1.0 / std::sqrt(static_cast<double>(p)));
}

Vector half_direction(int p) {
  Vector b = Vector::Zero(p);
  const int half = p / 2;
  b.head(half).setConstant(1.0 / std::sqrt(static_cast<double>(half)));
  return b;
}

bool is_two_index_family(Family f) {
  return f == Family::H21 || f == Family::H22 || f == Family::H23;
}

}  // namespace

double scenario_mean(Family f, double a, double u1, double u2) {
  switch (f) {
    case Family::H11: return u1 + a * std::exp(-1.5 * u1);
    case Family::H12: return u1 + 1.5 * a * u1 * u1 * u1;
    case Family::H13: return u1 + 6.0 * a * std::cos(0.8 * M_PI * u1);
    case Family::H14:
      return 2.5 * std::exp(0.5 * u1) + 1.5 * a * u1 * u1 * u1;
    case Family::H21: return u1 + 1.5 * a * u2 * u2 * u2;
    case Family::H22:
      return u1 + 0.3 * a * (4.0 * u2 * u2 * u2 + u2 * u2);
    case Family::H23: return u1 + 4.0 * a * std::exp(-u2);
    case Family::H31: return u1 + 2.0 * a * u1 * u1 * u1;
  }
  return 0.0;
}

namespace {

double draw_error(Rng& rng, ErrorDist dist, double lognormal_sigma2) {
  const double z = rng.normal();
  if (dist == ErrorDist::StdNormal) return z;
  const double sigma = std::sqrt(lognormal_sigma2);
  const double mean = std::exp(0.5 * lognormal_sigma2);
  const double sd = std::sqrt((std::exp(lognormal_sigma2) - 1.0) *
                              std::exp(lognormal_sigma2));
  return (std::exp(sigma * z) - mean) / sd;
}

}  // namespace

std::string scenario_key(const ScenarioSpec& s) {
  return family_name(s.family) + "|p=" + std::to_string(s.dimension()) +
         "|a=" + format_double(s.a) + "|n=" + std::to_string(s.n) +
         "|err=" + error_name(s.error) +
         "|contam=" + contamination_key(s.contamination) +
         "|ls2=" + format_double(s.lognormal_sigma2);
}

std::uint64_t scenario_cell_hash(const ScenarioSpec& s) {
  const std::string key = scenario_key(s);
  return fnv1a_bytes(key.data(), key.size());
}

std::pair<Dataset, GroundTruth> generate_scenario(const ScenarioSpec& spec,
                                                  std::uint64_t seed) {
  const int p = spec.dimension();
  const Index n = spec.n;
  if (is_two_index_family(spec.family) && p % 2 != 0) {
    throw Error("two-index families need an even dimension, got " +
                std::to_string(p));
  }
  Rng rng(seed);

  Matrix x(n, p);
  for (Index i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
  }

  const Vector b1 = ones_direction(p);
  const Vector b2 = is_two_index_family(spec.family) ? half_direction(p)
                                                     : Vector();
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    const double u1 = b1.dot(x.row(i));
    const double u2 = b2.size() > 0 ? b2.dot(x.row(i)) : 0.0;
    y[i] = scenario_mean(spec.family, spec.a, u1, u2) +
           draw_error(rng, spec.error, spec.lognormal_sigma2);
  }

  const ContaminationSpec& cont = spec.contamination;
  if (cont.kind != ContaminationSpec::Kind::None && cont.rate > 0.0) {
    const auto count = static_cast<Index>(
        std::llround(cont.rate * static_cast<double>(n)));
    // partial Fisher-Yates over 0..n-1 picks indices without replacement
    std::vector<Index> pool(static_cast<std::size_t>(n));
    std::iota(pool.begin(), pool.end(), Index(0));
    for (Index k = 0; k < count; ++k) {
      const auto pick =
          k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n - k)));
      std::swap(pool[static_cast<std::size_t>(k)],
                pool[static_cast<std::size_t>(pick)]);
    }
    std::vector<Index> chosen(pool.begin(), pool.begin() + count);
    std::sort(chosen.begin(), chosen.end());
    for (Index idx : chosen) {
      if (cont.kind == ContaminationSpec::Kind::AddConstant) {
        y[idx] += cont.value;
      } else {
        const double u1 = b1.dot(x.row(idx));
        const double base =
            cont.model == ReplacementModel::CosineRidge
                ? 5.5 * std::cos(3.0 * M_PI * u1)
                : 6.0 * std::exp(-std::abs(u1));
        y[idx] = base + draw_error(rng, spec.error, spec.lognormal_sigma2);
      }
    }
  }

  GroundTruth truth;
  if (spec.a != 0.0 && is_two_index_family(spec.family)) {
    truth.q_true = 2;
    truth.b_true = Matrix(p, 2);
    truth.b_true.col(0) = b1;
    truth.b_true.col(1) = b2;
  } else {
    truth.q_true = 1;
    truth.b_true = b1;
  }

  Dataset d;
  d.y = std::move(y);
  d.x = std::move(x);
  d.n = n;
  d.p = p;
  return {std::move(d), std::move(truth)};
}

namespace {

enum class RepOutcome : std::uint8_t { Accept = 0, Reject = 1, Failure = 2 };

void run_range(const ScenarioSpec& spec, const std::vector<TestMethod>& methods,
               std::uint64_t seed_base, std::uint64_t cell_hash,
               double critical, int rep_begin, int rep_end,
               std::vector<std::vector<RepOutcome>>& outcomes) {
  const LinkSpec link = link_for_family(spec.family);
  for (int r = rep_begin; r < rep_end; ++r) {
    const std::uint64_t seed =
        derive_seed(seed_base, cell_hash, static_cast<std::uint64_t>(r));
    Dataset data;
    try {
      data = generate_scenario(spec, seed).first;
    } catch (const Error&) {
      for (std::size_t m = 0; m < methods.size(); ++m) {
        outcomes[m][static_cast<std::size_t>(r)] = RepOutcome::Failure;
      }
      continue;
    }
    for (std::size_t m = 0; m < methods.size(); ++m) {
      RepOutcome out = RepOutcome::Failure;
      try {
        const TestReport report =
            run_lack_of_fit_test(data, link, methods[m]);
        if (!report.degenerate) {
          out = report.s_n_adj * report.s_n_adj >= critical
                    ? RepOutcome::Reject
                    : RepOutcome::Accept;
        }
      } catch (const Error&) {
        out = RepOutcome::Failure;
      }
      outcomes[m][static_cast<std::size_t>(r)] = out;
    }
  }
}

}  // namespace

PowerTable run_monte_carlo(const std::vector<ScenarioSpec>& grid,
                           const std::vector<TestMethod>& methods, int reps,
                           double alpha, std::uint64_t seed_base, int threads) {
  if (reps < 1) throw Error("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  const double critical = chi_square_quantile(1.0 - alpha);
  const int workers = std::max(1, threads);

  PowerTable table;
  table.alpha = alpha;
  table.reps = reps;
  table.seed_base = seed_base;

  for (const ScenarioSpec& spec : grid) {
    const std::uint64_t cell_hash = scenario_cell_hash(spec);
    std::vector<std::vector<RepOutcome>> outcomes(
        methods.size(),
        std::vector<RepOutcome>(static_cast<std::size_t>(reps),
                                RepOutcome::Failure));

    if (workers == 1 || reps == 1) {
      run_range(spec, methods, seed_base, cell_hash, critical, 0, reps,
                outcomes);
    } else {
      std::vector<std::thread> pool;
      const int chunk = (reps + workers - 1) / workers;
      for (int t = 0; t < workers; ++t) {
        const int begin = t * chunk;
        const int end = std::min(reps, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(run_range, std::cref(spec), std::cref(methods),
                          seed_base, cell_hash, critical, begin, end,
                          std::ref(outcomes));
      }
      for (std::thread& th : pool) th.join();
    }

    for (std::size_t m = 0; m < methods.size(); ++m) {
      PowerCell cell;
      cell.scenario = spec;
      cell.method = methods[m];
      cell.reps = reps;
      int rejects = 0;
      for (int r = 0; r < reps; ++r) {
        const RepOutcome out = outcomes[m][static_cast<std::size_t>(r)];
        if (out == RepOutcome::Failure) {
          ++cell.failures;
        } else if (out == RepOutcome::Reject) {
          ++rejects;
        }
      }
      const int valid = reps - cell.failures;
      cell.invalid = cell.failures * 100 >= reps && cell.failures > 0;
      cell.rejection_rate =
          valid > 0 ? static_cast<double>(rejects) / valid : 0.0;
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

}  // namespace rdream
