#include "doctest.h"

#include "hydec/core.hpp"
#include "hydec/rng.hpp"

using namespace hydec;

TEST_CASE("Vocab: size below 2 is rejected") {
  CHECK_THROWS_AS(Vocab(1), std::invalid_argument);
  CHECK_THROWS_AS(Vocab(0), std::invalid_argument);
  CHECK_THROWS_AS(Vocab(-3), std::invalid_argument);
  CHECK_NOTHROW(Vocab(2));
}

TEST_CASE("Vocab: eos id is reserved outside the content range") {
  const Vocab vocab(8);
  CHECK(vocab.eos_id() == 8);
  CHECK(!vocab.is_content(vocab.eos_id()));
  CHECK(vocab.is_content(0));
  CHECK(vocab.is_content(7));
  CHECK(!vocab.is_content(-1));
}

TEST_CASE("TokenSeq: constructing with eos or out-of-range ids is rejected") {
  const Vocab vocab(8);
  CHECK_THROWS_AS(TokenSeq({1, vocab.eos_id(), 2}, vocab),
                  std::invalid_argument);
  CHECK_THROWS_AS(TokenSeq({1, 9}, vocab), std::invalid_argument);
  CHECK_THROWS_AS(TokenSeq({-1}, vocab), std::invalid_argument);
  CHECK_NOTHROW(TokenSeq({0, 7, 3}, vocab));
  CHECK_NOTHROW(TokenSeq({}, vocab));
}

TEST_CASE("TokenSeq: prefix and prefix relation") {
  const TokenSeq seq = TokenSeq::unchecked({3, 1, 4, 1, 5});
  CHECK(seq.prefix(0) == TokenSeq::unchecked({}));
  CHECK(seq.prefix(3) == TokenSeq::unchecked({3, 1, 4}));
  CHECK(is_prefix_of(seq.prefix(3), seq));
  CHECK(is_prefix_of(seq, seq));
  CHECK(!is_prefix_of(TokenSeq::unchecked({3, 2}), seq));
  CHECK(!is_prefix_of(TokenSeq::unchecked({3, 1, 4, 1, 5, 9}), seq));
}

TEST_CASE("StepCostModel: defaults count unit forward steps, draft free") {
  const StepCostModel cost;
  CHECK(cost.verify_pass_cost == 1.0);
  CHECK(cost.ar_step_cost == 1.0);
  CHECK(cost.draft_step_cost == 0.0);
  CHECK_NOTHROW(cost.validate());

  StepCostModel bad;
  bad.ar_step_cost = -0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("HybridTrace: total transformer cost identity over random traces") {
  Rng rng(20240814);
  for (int trial = 0; trial < 200; ++trial) {
    HybridTrace trace;
    trace.verify_passes = rng.next_below(50);
    trace.ar_steps = rng.next_below(200);
    trace.draft_steps = rng.next_below(500);
    StepCostModel cost;
    cost.verify_pass_cost = rng.next_unit() * 4.0;
    cost.ar_step_cost = rng.next_unit() * 4.0;
    cost.draft_step_cost = rng.next_unit();

    const double expected =
        static_cast<double>(trace.verify_passes) * cost.verify_pass_cost +
        static_cast<double>(trace.ar_steps) * cost.ar_step_cost;
    CHECK(transformer_cost(trace, cost) == doctest::Approx(expected));
    CHECK(total_cost(trace, cost) ==
          doctest::Approx(expected + static_cast<double>(trace.draft_steps) *
                                         cost.draft_step_cost));
  }
}

TEST_CASE("ExitPath: string round-trip") {
  for (ExitPath path : {ExitPath::eos_confirmed, ExitPath::appended_eos,
                        ExitPath::appended_truncated}) {
    CHECK(exit_path_from_string(to_string(path)) == path);
  }
  CHECK_THROWS_AS(exit_path_from_string("bogus"), std::invalid_argument);
}
