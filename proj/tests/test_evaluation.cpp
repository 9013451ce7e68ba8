#include "doctest.h"

#include <cmath>

#include "pupilwatch/evaluation.hpp"
#include "pupilwatch/rng.hpp"

using namespace pupilwatch;

TEST_CASE("confusion basic cases and tie rule") {
  auto c = confusion({1, 0}, {0.9, 0.1});
  CHECK(c.tp == 1);
  CHECK(c.tn == 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);

  c = confusion({1, 0}, {0.1, 0.9});
  CHECK(c.tp == 0);
  CHECK(c.tn == 0);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);

  // p exactly at threshold predicts class 1
  c = confusion({1}, {0.5});
  CHECK(c.tp == 1);
}

TEST_CASE("mcc direct formula, perfect case, degenerate case") {
  ConfusionCounts c{2, 3, 1, 1};
  CHECK(mcc(c) == doctest::Approx(5.0 / 12.0).epsilon(1e-12));

  ConfusionCounts perfect{10, 20, 0, 0};
  CHECK(mcc(perfect) == doctest::Approx(1.0));

  ConfusionCounts all_zero_preds{0, 20, 0, 10};
  bool degenerate = false;
  CHECK(mcc(all_zero_preds, &degenerate) == 0.0);
  CHECK(degenerate);
}

TEST_CASE("metrics_suite ranked and tied AUC, F1") {
  auto r = metrics_suite({1, 1, 0, 0}, {0.9, 0.8, 0.2, 0.1});
  CHECK(r.auc == doctest::Approx(1.0));
  CHECK(r.f1 == doctest::Approx(1.0));

  r = metrics_suite({1, 0}, {0.5, 0.5});
  CHECK(r.auc == doctest::Approx(0.5));

  // tp=2, fp=1, fn=1 -> F1 = 2/3
  r = metrics_suite({1, 1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.1, 0.2});
  CHECK(r.counts.tp == 2);
  CHECK(r.counts.fp == 1);
  CHECK(r.counts.fn == 1);
  CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("single-class labels flag AUC undefined") {
  const auto r = metrics_suite({1, 1, 1}, {0.9, 0.8, 0.7});
  CHECK_FALSE(r.auc_defined);
  CHECK(r.accuracy == doctest::Approx(1.0));
}

TEST_CASE("MCC symmetric under simultaneous class and prediction relabel") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    ConfusionCounts c{rng.below(50), rng.below(50), rng.below(50), rng.below(50)};
    // relabeling 0<->1 in both truth and prediction swaps tp<->tn, fp<->fn
    ConfusionCounts swapped{c.tn, c.tp, c.fn, c.fp};
    CHECK(mcc(c) == doctest::Approx(mcc(swapped)).epsilon(1e-12));
  }
}

TEST_CASE("imbalance rationale: all-zeros classifier on a 2:1 set") {
  std::vector<int> labels;
  std::vector<double> probs;
  for (int i = 0; i < 300; ++i) {
    labels.push_back(i % 3 == 0 ? 1 : 0);
    probs.push_back(0.0);
  }
  const auto r = metrics_suite(labels, probs);
  CHECK(r.accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(r.mcc == 0.0);
  CHECK(r.mcc_degenerate);
}

TEST_CASE("AUC invariant under strictly monotone probability transform") {
  Rng rng(77);
  std::vector<int> labels;
  std::vector<double> probs, squashed;
  for (int i = 0; i < 200; ++i) {
    labels.push_back(rng.uniform() < 0.3 ? 1 : 0);
    const double p = rng.uniform();
    probs.push_back(p);
    squashed.push_back(1.0 / (1.0 + std::exp(-5.0 * (p - 0.2))));
  }
  CHECK(metrics_suite(labels, probs).auc ==
        doctest::Approx(metrics_suite(labels, squashed).auc).epsilon(1e-12));
}

TEST_CASE("metrics_suite invariant under joint permutation") {
  std::vector<int> labels = {1, 0, 1, 0, 0, 1, 0, 0};
  std::vector<double> probs = {0.9, 0.2, 0.6, 0.4, 0.1, 0.7, 0.55, 0.3};
  std::vector<int> perm_labels(labels.rbegin(), labels.rend());
  std::vector<double> perm_probs(probs.rbegin(), probs.rend());
  const auto a = metrics_suite(labels, probs);
  const auto b = metrics_suite(perm_labels, perm_probs);
  CHECK(a.mcc == doctest::Approx(b.mcc).epsilon(1e-12));
  CHECK(a.auc == doctest::Approx(b.auc).epsilon(1e-12));
  CHECK(a.f1 == doctest::Approx(b.f1).epsilon(1e-12));
}

TEST_CASE("cross_task_eval: constant-zero model and fair coin") {
  // 2:1 imbalanced window set over two tasks
  std::vector<int> labels;
  std::vector<TaskKind> tasks;
  Rng rng(5);
  for (int i = 0; i < 3000; ++i) {
    labels.push_back(i % 3 == 0 ? 1 : 0);
    tasks.push_back(i % 2 == 0 ? TaskKind::DPT : TaskKind::PVT);
  }
  std::vector<double> zeros(labels.size(), 0.0);
  std::vector<double> coin;
  for (std::size_t i = 0; i < labels.size(); ++i) coin.push_back(rng.uniform());

  const auto m = cross_task_eval({"ALL", "DPT"}, {zeros, coin}, labels, tasks);
  REQUIRE(m.cells.size() == 2);
  REQUIRE(m.cells[0].size() == 5);
  // constant 0 classifier: TNR 1, TPR 0 everywhere it has data
  CHECK(m.cells[0][0].tnr == doctest::Approx(1.0));
  CHECK(m.cells[0][0].tpr == doctest::Approx(0.0));
  // fair coin: both rates near 0.5
  CHECK(m.cells[1][4].tnr == doctest::Approx(0.5).epsilon(0.1));
  CHECK(m.cells[1][4].tpr == doctest::Approx(0.5).epsilon(0.1));
  // same-task marking: ALL row marked everywhere, DPT row only on DPT
  for (const auto& cell : m.cells[0]) CHECK(cell.same_task);
  CHECK(m.cells[1][0].same_task);
  CHECK_FALSE(m.cells[1][2].same_task);
  // pooled column count equals sum of per-task counts
  std::uint64_t sum = 0;
  for (int d = 0; d < 4; ++d) sum += m.cells[0][static_cast<std::size_t>(d)].n_windows;
  CHECK(m.cells[0][4].n_windows == sum);
}
