#include "doctest.h"
#include "helpers.hpp"

#include "goemax/local_estimation.hpp"

using namespace goemax;

namespace {

LocalEstimationConfig local_cfg(PeerModel peers, SuccessSurrogate s, AlphaTying tying) {
  LocalEstimationConfig c;
  c.peers = peers;
  c.surrogate = s;
  c.draws = 200;
  c.optimizer.tying = tying;
  return c;
}

}  // namespace

TEST_SUITE("local_estimation") {
  TEST_CASE("true peer positions with the exact surrogate reproduce the central model") {
    const ProblemInstance inst = testing::tiny_instance(3, 3, 2, 2);
    const auto cfg = local_cfg(PeerModel::kTruth, SuccessSurrogate::kExact, AlphaTying::kPerAttribute);
    const EffectivenessModel central(inst), local = local_model(inst, 0, cfg);
    for (int j = 0; j < inst.num_slots(); ++j) {
      const auto& a = central.table(j).failure;
      const auto& b = local.table(j).failure;
      REQUIRE(a.size() == b.size());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("true peer positions: local and central activations coincide") {
    ProblemInstance inst = testing::tiny_instance(4, 3, 2, 2);
    const AlphaLayout lay(inst, AlphaTying::kPerAttribute);
    double top = 0.0;
    for (double a = 0.0; a <= 1.0; a += 0.01)
      top = std::max(top, EffectivenessModel(inst).evaluate(lay.expand(Eigen::VectorXd::Constant(2, a))).constraint);
    inst.euu_min = 0.5 * top;
    const auto cfg = local_cfg(PeerModel::kTruth, SuccessSurrogate::kExact, AlphaTying::kPerAttribute);
    const Solution central = solve_algorithm1(EffectivenessModel(inst), cfg.optimizer);
    for (int k = 0; k < 3; ++k) {
      const LocalEstimate est = estimate_alpha_locally(inst, k, cfg);
      CHECK((est.alpha.transpose() - central.alpha_star.row(k)).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }

  TEST_CASE("a lone observer has no peer statistics to estimate") {
    ProblemInstance inst = testing::tiny_instance(5, 1, 2, 2);
    inst.euu_min = 0.05;
    const auto cfg = local_cfg(PeerModel::kSampled, SuccessSurrogate::kExact, AlphaTying::kPerAttribute);
    const Solution central = solve_algorithm1(EffectivenessModel(inst), cfg.optimizer);
    const LocalEstimate est = estimate_alpha_locally(inst, 0, cfg);
    CHECK((est.alpha.transpose() - central.alpha_star.row(0)).cwiseAbs().maxCoeff() <= 1e-9);
  }

  TEST_CASE("kernel table: silence fails, Chernoff scoring never fails more often") {
    const ProblemInstance inst = testing::default_instance();
    const LocalKernelTable bound(inst, 2, local_cfg(PeerModel::kSampled, SuccessSurrogate::kChernoffBound, AlphaTying::kTied));
    const LocalKernelTable exact(inst, 2, local_cfg(PeerModel::kSampled, SuccessSurrogate::kExact, AlphaTying::kTied));
    CHECK(bound.failure(0, 0, 0) == 1.0);
    CHECK(bound.failure(2, 0, 3) == 1.0);
    for (int own = 0; own < 3; ++own)
      for (int c = 0; c <= bound.max_peers(); ++c)
        for (int w = 0; c + w <= bound.max_peers(); ++w) {
          CHECK(bound.failure(own, c, w) <= exact.failure(own, c, w) + 1e-12);
          CHECK(exact.failure(own, c, w) >= 0.0);
        }
  }

  TEST_CASE("more interferers never help") {
    const ProblemInstance inst = testing::default_instance();
    const LocalKernelTable t(inst, 0, local_cfg(PeerModel::kSampled, SuccessSurrogate::kExact, AlphaTying::kTied));
    for (int c = 1; c + 1 <= t.max_peers(); ++c) CHECK(t.failure(1, c, 1) >= t.failure(1, c, 0) - 1e-12);
  }

  TEST_CASE("stacked local estimates fill observed cells only") {
    const ProblemInstance inst = testing::tiny_instance(6, 3, 2, 2);
    auto cfg = local_cfg(PeerModel::kSampled, SuccessSurrogate::kChernoffBound, AlphaTying::kPerAttribute);
    ProblemInstance bound = inst;
    bound.euu_min = 0.02;
    const Eigen::MatrixXd a = estimate_all_locally(bound, cfg);
    CHECK(a.rows() == 3);
    CHECK(a.cols() == 2);
    CHECK(a.minCoeff() >= 0.0);
    CHECK(a.maxCoeff() <= 1.0);
    CHECK_THROWS(estimate_alpha_locally(inst, 7, cfg));
  }
}
