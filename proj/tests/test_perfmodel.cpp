#include <doctest.h>

#include <cmath>

#include "hdgmg/error.hpp"
#include "hdgmg/hdg_local.hpp"
#include "hdgmg/perfmodel.hpp"
#include "oracles.hpp"

using namespace hdgmg;

TEST_CASE("perfmodel: roofline ceilings") {
  MachineModel m;
  m.peak_flops = 2199e9;
  m.peak_bandwidth = 300e9;
  const auto csr = roofline_point(m, 1.0, 4.0);
  CHECK(csr.ai == doctest::Approx(0.25));
  CHECK(csr.attainable == doctest::Approx(75e9));
  CHECK(!csr.achieved);
  CHECK(roofline_point(m, 1.0, 0.0).attainable == m.peak_flops);
  CHECK(roofline_point(m, 1e6, 1.0).attainable == m.peak_flops);
  MachineModel tiny{10.0, 1.0, "toy"};
  CHECK(roofline_point(tiny, 1.0, 1.0).attainable == doctest::Approx(1.0));
  const auto timed = roofline_point(m, 2e9, 1e9, 0.5);
  REQUIRE(timed.achieved);
  CHECK(*timed.achieved == doctest::Approx(4e9));
  CHECK_THROWS_AS(roofline_point(MachineModel{0.0, 1.0, ""}, 1.0, 1.0), Error);
}

TEST_CASE("perfmodel: projection cost follows the closed form") {
  for (int p = 0; p <= 8; ++p)
    for (int k = 0; k <= 8; ++k) CHECK(projection_cost(p, k).ai() == doctest::Approx(oracle::projection_ai(p, k)));
  const auto c00 = projection_cost(0, 0);
  CHECK(c00.flops == doctest::Approx(32 - 4 + 2.0 / 3.0 * 64 + 4 * 7 + 8));
  CHECK(c00.memops == doctest::Approx(320));
  for (int k = 0; k <= 4; ++k)
    for (int p = 1; p <= 8; ++p) CHECK(projection_cost(p, k).ai() > projection_cost(p - 1, k).ai());
  CHECK_THROWS_AS(projection_cost(-1, 0), Error);
}

TEST_CASE("perfmodel: dense matvec intensity tends to 1/4") {
  CHECK(dense_matvec_cost(1e6).ai() == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(dense_matvec_cost(10).ai() < 0.25);
}

TEST_CASE("perfmodel: machine model parsing") {
  const MachineModel m = parse_machine_model("# comment\npeak_gflops=100\npeak_gbs = 50\nlabel=laptop\n");
  CHECK(m.peak_flops == doctest::Approx(100e9));
  CHECK(m.peak_bandwidth == doctest::Approx(50e9));
  CHECK(m.label == "laptop");
  CHECK_THROWS_AS(parse_machine_model("peak_gflops=100\n"), Error);
  CHECK_THROWS_AS(parse_machine_model("peak_gflops=abc\npeak_gbs=1\n"), Error);
  CHECK_THROWS_AS(parse_machine_model("peak_gflops=1\npeak_gbs=1\nfoo=2\n"), Error);
  CHECK_THROWS_AS(parse_machine_model("peak_gflops=-1\npeak_gbs=1\n"), Error);
  CHECK_THROWS_AS(parse_machine_model("just text\n"), Error);
  try {
    read_machine_model("/nonexistent/machine.txt");
    FAIL("expected configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
}

TEST_CASE("perfmodel: work-precision study") {
  const auto st = work_precision_study(manufactured_problem(1.0), 4, {3, 1, 2, 2});
  REQUIRE(st.solve_only.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(st.solve_only[i].p == static_cast<int>(i) + 1);
    CHECK(st.postprocessed[i].flops == doctest::Approx(st.solve_only[i].flops + 16 * postprocess_flops(i + 1)));
    CHECK(st.postprocessed[i].l2_error < st.solve_only[i].l2_error);
    if (i) CHECK(st.solve_only[i].l2_error < st.solve_only[i - 1].l2_error);
  }
  if (st.crossover) {
    const int p = *st.crossover;
    const auto wide = work_precision_study(manufactured_problem(1.0), 4, {p, p + 1});
    CHECK(wide.postprocessed[0].flops < wide.solve_only[1].flops);
    CHECK(wide.postprocessed[0].l2_error < wide.solve_only[1].l2_error);
  }
  CHECK_THROWS_AS(work_precision_study(manufactured_problem(1.0), 4, {0}), Error);
  ProblemSpec noexact = manufactured_problem(1.0);
  noexact.exact_u = nullptr;
  CHECK_THROWS_AS(work_precision_study(noexact, 4, {1}), Error);
}
