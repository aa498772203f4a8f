#include <doctest.h>

#include <cmath>

#include "nccipw/error.hpp"
#include "nccipw/simulation.hpp"

using namespace ncc;

namespace {

SimConfig small_config() {
  SimConfig c;
  c.n_cohort = 400;
  c.n_reps = 3;
  c.n_perturb = 5;
  c.master_seed = 77;
  return c;
}

SchemeResult scheme(std::optional<double> v, FitStatus st = FitStatus::Converged) { return {{v}, st}; }

}  // namespace

TEST_CASE("normal CDF accuracy") {
  CHECK(std::abs(standard_normal_cdf(0.0) - 0.5) < 1e-15);
  CHECK(std::abs(standard_normal_cdf(1.0) - 0.8413447460685429) < 1e-12);
  CHECK(std::abs(standard_normal_cdf(-2.5) - 0.006209665325776132) < 1e-12);
  CHECK(std::abs(standard_normal_cdf(6.0) - 0.9999999990134123) < 1e-12);
}

TEST_CASE("generator marginals") {
  const SimCohort sc = generate_cohort(100000, 81);
  const Cohort& c = sc.cohort;
  double mb = 0, vb = 0, m1 = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double b = c.markers()(long(i), 1);
    mb += b;
    vb += b * b;
    m1 += c.match_vars()(long(i), 0);
    const double m2 = c.match_vars()(long(i), 1);
    CHECK((m2 >= 0.0 && m2 <= 5.0 && m2 == std::floor(m2)));
    CHECK(c.time(i) == std::min(sc.event_time[i], sc.censor_time[i]));
    CHECK(c.is_event(i) == (sc.event_time[i] <= sc.censor_time[i]));
    CHECK(sc.censor_time[i] <= 2.0);
  }
  const double n = double(c.size());
  mb /= n;
  vb = vb / n - mb * mb;
  CHECK(std::abs(mb) < 3 * std::sqrt(2.0 / n));
  CHECK(std::abs(vb - 2.0) < 0.05);
  CHECK(std::abs(m1 / n - 0.5) < 3 * std::sqrt(0.25 / n));
  const double cens = 1.0 - double(c.n_events()) / n;
  CHECK(cens > 0.9);
}

TEST_CASE("generator is deterministic") {
  const SimCohort a = generate_cohort(300, 82), b = generate_cohort(300, 82);
  CHECK(a.event_time == b.event_time);
  CHECK(a.censor_time == b.censor_time);
  CHECK(a.cohort.markers() == b.cohort.markers());
}

TEST_CASE("Cox truths are exact") {
  SimConfig cfg = small_config();
  const std::vector<double> t = true_values(cfg);
  REQUIRE(t.size() == 8);
  CHECK(t[0] == -3.0);
  CHECK(t[1] == 0.5);
  CHECK(t[2] == 0.5);
  CHECK(t[7] == doctest::Approx(0.05).epsilon(0.02));
  CHECK(sim_parameter_names() == std::vector<std::string>{"alpha", "beta_Z", "beta_B", "auc", "tpr", "npv", "ppv", "fpr"});
  CHECK(report_parameter_indices().size() == 7);
}

TEST_CASE("replications are reproducible") {
  const SimConfig cfg = small_config();
  const ReplicationRecord a = run_replication(cfg, 2), b = run_replication(cfg, 2);
  CHECK(a.ipw_new.values == b.ipw_new.values);
  CHECK(a.samuelsen.values == b.samuelsen.values);
  CHECK(a.full.values == b.full.values);
  REQUIRE(a.perturbation);
  CHECK(a.perturbation->se == b.perturbation->se);
  const ReplicationRecord c = run_replication(cfg, 2, 3);
  CHECK(a.perturbation->se == c.perturbation->se);
}

TEST_CASE("pi1 = 1 gives identical weighted columns") {
  SimConfig cfg = small_config();
  cfg.pi1 = 1.0;
  cfg.n_perturb = 0;
  for (ModelKind model : {ModelKind::Cox, ModelKind::Glm}) {
    cfg.model = model;
    const SimulationResult r = run_simulation(cfg, 2);
    for (const ReplicationRecord& rec : r.records) CHECK(rec.ipw_new.values == rec.samuelsen.values);
    for (const AggregateRow& row : r.report.rows) {
      CHECK(row.bias_new == row.bias_samuelsen);
      CHECK(row.esd_new == row.esd_samuelsen);
    }
  }
}

TEST_CASE("aggregate of three hand-built records") {
  std::vector<ReplicationRecord> recs(3);
  const double full[] = {1, 2, 3}, nw[] = {2, 3, 4};
  const std::optional<double> sam[] = {1.0, std::nullopt, 3.0};
  const double se[] = {0.5, 1.0, 1.5};
  const std::optional<double> lo[] = {1.0, 2.5, std::nullopt}, hi[] = {3.0, 3.5, std::nullopt};
  for (std::size_t r = 0; r < 3; ++r) {
    recs[r].rep_id = r;
    recs[r].full = scheme(full[r]);
    recs[r].ipw_new = scheme(nw[r]);
    recs[r].samuelsen = sam[r] ? scheme(sam[r]) : scheme(std::nullopt, FitStatus::Diverged);
    PerturbationResult p;
    p.se = {se[r]};
    p.ci_lower = {lo[r]};
    p.ci_upper = {hi[r]};
    recs[r].perturbation = p;
  }
  const AggregateReport rep = aggregate(recs, {2.0}, {"x"}, {0});
  REQUIRE(rep.rows.size() == 1);
  const AggregateRow& row = rep.rows[0];
  CHECK(*row.bias_full == 0.0);
  CHECK(*row.bias_samuelsen == 0.0);
  CHECK(*row.esd_samuelsen == doctest::Approx(std::sqrt(2.0)));
  CHECK(*row.bias_new == 1.0);
  CHECK(*row.esd_new == doctest::Approx(1.0));
  CHECK(*row.pase == doctest::Approx(1.0));
  CHECK(*row.coverage == doctest::Approx(0.5));
  CHECK(row.coverage_excluded == 1);
  CHECK(row.nonconv_samuelsen == 1);
  CHECK(row.nonconv_new == 0);
}

TEST_CASE("records equal to the truth aggregate to zero bias and full coverage") {
  std::vector<ReplicationRecord> recs(4);
  for (auto& r : recs) {
    r.full = r.samuelsen = r.ipw_new = scheme(0.7);
    PerturbationResult p;
    p.se = {0.1};
    p.ci_lower = {0.5};
    p.ci_upper = {0.9};
    r.perturbation = p;
  }
  const AggregateRow row = aggregate(recs, {0.7}, {"x"}, {0}).rows[0];
  CHECK(*row.bias_new == 0.0);
  CHECK(*row.esd_new == 0.0);
  CHECK(*row.coverage == 1.0);
}

TEST_CASE("simulation config validation") {
  SimConfig c = small_config();
  c.pi1 = 0.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("pi1"), InputError);
  c = small_config();
  c.fpr_target = 1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("fpr_target"), InputError);
  c = small_config();
  c.n_reps = 0;
  CHECK_THROWS_AS(c.validate(), InputError);
}
