#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gsm/engine.hpp"
#include "gsm/ingest.hpp"
#include "gsm/scoring.hpp"
#include "testutil.hpp"

using namespace gsm;

namespace {

// Attaches an output distribution under one input without touching the
// node's position in the tree. Targets point at the root; the compatibility
// predicates never follow them.
void add_dist(Iofa& m, StateId s, const char* input,
              const std::vector<std::pair<const char*, std::uint64_t>>& counts) {
    Symbol in = m.inputs().intern(input);
    for (const auto& [text, c] : counts) {
        Symbol out = m.outputs().intern(text);
        m.state(s).transitions.obtain(in).obtain(out) = TransitionInfo{0, 0, c, c};
    }
}

PartitionClass class_with(Iofa& m, StateId rep, std::vector<StateId> members, const char* input,
                          const std::vector<std::pair<const char*, std::uint64_t>>& counts) {
    PartitionClass cls;
    cls.representative = rep;
    cls.members = std::move(members);
    Symbol in = m.inputs().intern(input);
    for (const auto& [text, c] : counts) {
        Symbol out = m.outputs().intern(text);
        cls.transitions.obtain(in).obtain(out) = TransitionInfo{rep, kNoState, c, 0};
    }
    return cls;
}

Partition partition_of(std::vector<PartitionClass> classes) {
    Partition p;
    p.classes = std::move(classes);
    for (std::uint32_t i = 0; i < p.classes.size(); ++i)
        for (StateId s : p.classes[i].members) p.class_of[s] = i;
    return p;
}

EngineConfig rpni_config(BehaviorConfig behavior) {
    EngineConfig cfg;
    cfg.behavior = behavior;
    cfg.strategy = rpni_strategy();
    return cfg;
}

// P(X >= k) summed term by term straight from lgamma, no recurrence. Slower
// than the library routine but independent of it.
double direct_tail(std::uint64_t k, std::uint64_t n, double p) {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double sum = 0.0;
    for (std::uint64_t i = k; i <= n; ++i) {
        double id = static_cast<double>(i);
        double nd = static_cast<double>(n);
        sum += std::exp(std::lgamma(nd + 1.0) - std::lgamma(id + 1.0) -
                        std::lgamma(nd - id + 1.0) + id * std::log(p) +
                        (nd - id) * std::log1p(-p));
    }
    return std::min(sum, 1.0);
}

}  // namespace

TEST_CASE("edsm score counts states merged minus classes formed") {
    Iofa m = build_pta(testutil::mergeable_sample(), testutil::mealy_det());
    EngineConfig cfg = rpni_config(testutil::mealy_det());

    auto cascade = try_merge(m, 0, 1, cfg);
    REQUIRE(cascade);
    CHECK(edsm_score(cascade->partition) == 4);  // {0,1,3,4} and {2,5}

    auto leaf = try_merge(m, 0, 2, cfg);
    REQUIRE(leaf);
    CHECK(edsm_score(leaf->partition) == 1);  // single class {0,2}

    CHECK(edsm_score(Partition{}) == 0);
}

TEST_CASE("edsm strategy wraps the count as a plain value") {
    Iofa m = build_pta(testutil::mergeable_sample(), testutil::mealy_det());
    EngineConfig cfg = rpni_config(testutil::mealy_det());
    auto outcome = try_merge(m, 0, 1, cfg);
    REQUIRE(outcome);

    MergeStrategy s = edsm_strategy();
    CHECK(s.name == "edsm");
    REQUIRE(s.score_function);
    Score score = s.score_function(m, outcome->partition);
    CHECK(score.kind == Score::Kind::value);
    CHECK(score.value == 4.0);

    // Any successful candidate merges at least the seed pair.
    for (StateId blue : compute_blue(m, {0}, cfg)) {
        auto c = try_merge(m, 0, blue, cfg);
        if (c) CHECK(edsm_score(c->partition) >= 1);
    }
}

TEST_CASE("edsm prefers the candidate with more evidence") {
    // Intermediate position from the promotion sample: after promoting state
    // 1 and merging the y-leaf into the root, the cascade (1,3) collapses
    // three states while nothing else beats it.
    Iofa m = build_pta(testutil::promotion_sample(), testutil::mealy_det());
    EngineConfig cfg = rpni_config(testutil::mealy_det());
    auto first = try_merge(m, 0, 2, cfg);
    REQUIRE(first);
    apply_merge(m, first->partition);

    auto cascade = try_merge(m, 1, 3, cfg);
    REQUIRE(cascade);
    CHECK(edsm_score(cascade->partition) == 2);  // {1,3,4}
    CHECK(testutil::assignment_of(cascade->partition) ==
          std::map<StateId, StateId>{{1, 1}, {3, 1}, {4, 1}});
}

TEST_CASE("hoeffding test is vacuously true on an empty side") {
    CHECK(hoeffding_compat(0, 0, 7, 9, 0.05));
    CHECK(hoeffding_compat(7, 9, 0, 0, 0.05));
    CHECK(hoeffding_compat(0, 0, 0, 0, 0.05));
}

TEST_CASE("hoeffding test separates ratios at the frozen bound") {
    // For n1 = n2 = 100 and epsilon 0.05 the bound is 0.2716203031481239.
    CHECK(hoeffding_compat(5, 10, 5, 10, 0.05));
    CHECK(hoeffding_compat(0, 100, 27, 100, 0.05));
    CHECK_FALSE(hoeffding_compat(0, 100, 28, 100, 0.05));
    CHECK_FALSE(hoeffding_compat(0, 100, 100, 100, 0.05));

    // Epsilon 0.5 tightens the bound to 0.16651092223153954.
    CHECK(hoeffding_compat(0, 100, 16, 100, 0.5));
    CHECK_FALSE(hoeffding_compat(0, 100, 17, 100, 0.5));
}

TEST_CASE("hoeffding test is symmetric and loosens as epsilon shrinks") {
    for (std::uint64_t f1 = 0; f1 <= 100; f1 += 10)
        for (std::uint64_t f2 = 0; f2 <= 100; f2 += 10) {
            CHECK(hoeffding_compat(f1, 100, f2, 100, 0.05) ==
                  hoeffding_compat(f2, 100, f1, 100, 0.05));
            if (hoeffding_compat(f1, 100, f2, 100, 0.2))
                CHECK(hoeffding_compat(f1, 100, f2, 100, 0.01));
        }
}

TEST_CASE("ioalergia compatibility compares shared inputs over the output union") {
    Iofa m;
    Symbol dummy_in = m.inputs().intern("u");
    Symbol dummy_out = m.outputs().intern("c");
    std::vector<StateId> nodes;
    for (int i = 0; i < 10; ++i) nodes.push_back(m.add_state(0, dummy_in, dummy_out));

    HoeffdingParams params{0.05};
    auto compat = [&](StateId a, StateId b) {
        bool fwd = ioalergia_compat(NodeView(m, a), NodeView(m, b), params);
        CHECK(fwd == ioalergia_compat(NodeView(m, b), NodeView(m, a), params));
        return fwd;
    };

    add_dist(m, nodes[0], "d", {{"A", 100}});
    add_dist(m, nodes[1], "l", {{"A", 100}});
    CHECK(compat(nodes[0], nodes[1]));  // no shared input, nothing to compare

    add_dist(m, nodes[2], "d", {{"A", 100}});
    add_dist(m, nodes[3], "d", {{"N", 100}});
    CHECK_FALSE(compat(nodes[2], nodes[3]));

    add_dist(m, nodes[4], "d", {{"A", 50}, {"N", 50}});
    add_dist(m, nodes[5], "d", {{"A", 50}, {"N", 50}});
    CHECK(compat(nodes[4], nodes[5]));

    add_dist(m, nodes[6], "d", {{"A", 60}, {"N", 40}});
    CHECK(compat(nodes[4], nodes[6]));  // ratio gap 0.1 sits inside the bound

    // Outputs only one side saw still participate, counted as zero on the
    // other side.
    add_dist(m, nodes[7], "d", {{"A", 90}, {"N", 10}});
    add_dist(m, nodes[8], "d", {{"A", 100}});
    CHECK(compat(nodes[7], nodes[8]));
    CHECK_FALSE(compat(nodes[4], nodes[8]));  // missing N at ratio 0.5 is too much

    // A second shared input can veto on its own.
    add_dist(m, nodes[4], "e", {{"A", 100}});
    add_dist(m, nodes[5], "e", {{"N", 100}});
    CHECK_FALSE(compat(nodes[4], nodes[5]));
}

TEST_CASE("ioalergia compatibility reads frozen counts through pta views") {
    Iofa m;
    Symbol d = m.inputs().intern("d");
    Symbol a = m.outputs().intern("A");
    Symbol n = m.outputs().intern("N");
    Symbol dummy = m.outputs().intern("c");
    StateId s = m.add_state(0, d, dummy);
    StateId t = m.add_state(0, d, dummy);

    // s kept 10 original A-steps and gained 90 N-steps from a merge fold.
    m.state(s).transitions.obtain(d).obtain(a) = TransitionInfo{0, 0, 10, 10};
    m.state(s).transitions.obtain(d).obtain(n) = TransitionInfo{0, kNoState, 90, 0};
    m.state(t).transitions.obtain(d).obtain(a) = TransitionInfo{0, 0, 100, 100};

    HoeffdingParams params{0.05};
    CHECK_FALSE(ioalergia_compat(NodeView(m, s), NodeView(m, t), params));
    CHECK(ioalergia_compat(NodeView(m, s, true), NodeView(m, t, true), params));
}

TEST_CASE("ioalergia strategy carries only the pair predicate") {
    MergeStrategy s = ioalergia_strategy({0.05});
    CHECK(s.name == "ioalergia");
    CHECK(s.local_compatibility);
    CHECK_FALSE(s.score_function);
    CHECK_FALSE(s.reset);
}

TEST_CASE("lifting a pair predicate pairs every member with its class") {
    Iofa m = build_pta(testutil::mergeable_sample(), testutil::mealy_det());
    EngineConfig cfg = rpni_config(testutil::mealy_det());
    auto outcome = try_merge(m, 0, 1, cfg);
    REQUIRE(outcome);

    Symbol x = m.inputs().lookup("x");
    Symbol y = m.inputs().lookup("y");
    std::vector<StateId> seen;
    auto lifted = local_to_global_compatibility([&](const NodeView& member, const NodeView& cls) {
        CHECK(member.is_state());
        CHECK_FALSE(cls.is_state());
        seen.push_back(member.state_id());
        if (member.state_id() == 2 || member.state_id() == 5) {
            CHECK_FALSE(cls.has_input(x));  // leaf class folded no behavior
        } else {
            CHECK(cls.total(x) == 5);
            CHECK(cls.total(y) == 2);
        }
        return true;
    });

    Score score = lifted(m, outcome->partition);
    CHECK(score.is_accept());
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<StateId>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("lifted predicate rejects when any member disagrees") {
    Iofa m = build_pta(testutil::mergeable_sample(), testutil::mealy_det());
    EngineConfig cfg = rpni_config(testutil::mealy_det());
    auto outcome = try_merge(m, 0, 1, cfg);
    REQUIRE(outcome);

    auto veto_five = local_to_global_compatibility(
        [](const NodeView& member, const NodeView&) { return member.state_id() != 5; });
    CHECK(veto_five(m, outcome->partition).is_reject());

    auto accept_all = local_to_global_compatibility(
        [](const NodeView&, const NodeView&) { return true; });
    CHECK(accept_all(m, outcome->partition).is_accept());
}

TEST_CASE("partition-level ioalergia rechecks members against live class counts") {
    MergeStrategy s = ioalergia_partition_strategy({0.05});
    CHECK(s.name == "ioalergia-partition");
    CHECK_FALSE(s.local_compatibility);
    REQUIRE(s.score_function);

    Iofa skewed;
    StateId other = skewed.add_state(0, skewed.inputs().intern("u"), skewed.outputs().intern("c"));
    add_dist(skewed, 0, "d", {{"A", 90}, {"N", 10}});
    add_dist(skewed, other, "d", {{"A", 10}, {"N", 90}});
    Partition bad = partition_of(
        {class_with(skewed, 0, {0, other}, "d", {{"A", 100}, {"N", 100}})});
    CHECK(s.score_function(skewed, bad).is_reject());

    Iofa balanced;
    StateId peer =
        balanced.add_state(0, balanced.inputs().intern("u"), balanced.outputs().intern("c"));
    add_dist(balanced, 0, "d", {{"A", 55}, {"N", 45}});
    add_dist(balanced, peer, "d", {{"A", 55}, {"N", 45}});
    Partition good = partition_of(
        {class_with(balanced, 0, {0, peer}, "d", {{"A", 110}, {"N", 90}})});
    CHECK(s.score_function(balanced, good).is_accept());
}

TEST_CASE("evidence strategy scores the pair checks a candidate survived") {
    // Shared two-level subtree: the future walk from (1,2) visits the seed
    // plus the two successor pairs, so three checks pass.
    TraceSet data;
    data.io.push_back({std::nullopt, {{"x", "a"}, {"p", "c"}}});
    data.io.push_back({std::nullopt, {{"x", "a"}, {"q", "d"}}});
    data.io.push_back({std::nullopt, {{"y", "b"}, {"p", "c"}}});
    data.io.push_back({std::nullopt, {{"y", "b"}, {"q", "d"}}});
    Iofa m = build_pta(data, testutil::mealy_det());

    EngineConfig cfg;
    cfg.behavior = testutil::mealy_det();
    cfg.strategy = ioalergia_edsm_strategy({0.05});
    cfg.eval_compat_on_futures = true;
    CHECK(cfg.strategy.name == "ioalergia-edsm");
    REQUIRE(cfg.strategy.reset);

    cfg.strategy.reset();
    auto outcome = try_merge(m, 1, 2, cfg);
    REQUIRE(outcome);
    CHECK(outcome->score.kind == Score::Kind::value);
    CHECK(outcome->score.value == 3.0);
    CHECK(outcome->partition.classes.size() == 3);

    // Every evaluation resets the counter at entry, so candidates score
    // independently no matter how many ran before.
    auto again = try_merge(m, 1, 2, cfg);
    REQUIRE(again);
    CHECK(again->score.value == 3.0);

    // The counter lives behind the strategy copies: the same tally is
    // readable through this copy until something resets it.
    CHECK(cfg.strategy.score_function(m, Partition{}).value == 3.0);
    cfg.strategy.reset();
    CHECK(cfg.strategy.score_function(m, Partition{}).value == 0.0);
}

TEST_CASE("evidence strategy rejects a candidate that fails a check") {
    TraceSet data;
    for (int i = 0; i < 95; ++i) data.io.push_back({std::nullopt, {{"u", "c"}, {"d", "A"}}});
    for (int i = 0; i < 5; ++i) data.io.push_back({std::nullopt, {{"u", "c"}, {"d", "N"}}});
    for (int i = 0; i < 5; ++i) data.io.push_back({std::nullopt, {{"v", "c"}, {"d", "A"}}});
    for (int i = 0; i < 95; ++i) data.io.push_back({std::nullopt, {{"v", "c"}, {"d", "N"}}});
    BehaviorConfig behavior =
        testutil::behavior(OutputBehavior::mealy, TransitionBehavior::stochastic);
    Iofa m = build_pta(data, behavior);

    EngineConfig cfg;
    cfg.behavior = behavior;
    cfg.strategy = ioalergia_edsm_strategy({0.05});
    cfg.eval_compat_on_futures = true;
    cfg.strategy.reset();

    MergeRejection why;
    CHECK_FALSE(try_merge(m, 1, 2, cfg, &why));
    CHECK(why.constraint == "local_compatibility");
    CHECK(why.a == 1);
    CHECK(why.b == 2);
    // The failing check still counted: evidence is checks attempted, reset
    // per candidate by the engine loop.
    CHECK(cfg.strategy.score_function(m, Partition{}).value == 1.0);
}

TEST_CASE("parity compatibility compares l and d counts mod two") {
    Iofa m;
    Symbol l = m.inputs().intern("l");
    Symbol d = m.inputs().intern("d");
    Symbol z = m.inputs().intern("z");
    Symbol o = m.outputs().intern("o");
    StateId s1 = m.add_state(0, l, o);
    StateId s2 = m.add_state(s1, d, o);
    StateId s3 = m.add_state(s2, d, o);
    StateId sd = m.add_state(0, d, o);
    StateId sz = m.add_state(0, z, o);

    CHECK(parity_compat(NodeView(m, 0), NodeView(m, 0)));
    CHECK(parity_compat(NodeView(m, s1), NodeView(m, s3)));  // l-parity 1, d-parity 0 twice
    CHECK_FALSE(parity_compat(NodeView(m, s1), NodeView(m, sd)));
    CHECK_FALSE(parity_compat(NodeView(m, 0), NodeView(m, s2)));
    CHECK(parity_compat(NodeView(m, 0), NodeView(m, sz)));  // other inputs don't count

    std::vector<StateId> all{0, s1, s2, s3, sd, sz};
    for (StateId a : all)
        for (StateId b : all)
            CHECK(parity_compat(NodeView(m, a), NodeView(m, b)) ==
                  parity_compat(NodeView(m, b), NodeView(m, a)));

    PartitionClass cls;
    cls.representative = 0;
    CHECK(parity_compat(NodeView(m, cls), NodeView(m, sd)));
    CHECK(parity_compat(NodeView(m, sd), NodeView(m, cls)));

    Iofa plain;
    StateId other = plain.add_state(0, plain.inputs().intern("z"), plain.outputs().intern("o"));
    CHECK(parity_compat(NodeView(plain, 0), NodeView(plain, other)));
}

TEST_CASE("extra compatibility is consulted before the base strategy") {
    Iofa m;
    NodeView v(m, 0);

    int inner_calls = 0;
    MergeStrategy probe;
    probe.local_compatibility = [&](const NodeView&, const NodeView&) {
        ++inner_calls;
        return true;
    };

    MergeStrategy vetoed = with_extra_compat(probe, [](const NodeView&, const NodeView&) {
        return false;
    });
    CHECK_FALSE(vetoed.local_compatibility(v, v));
    CHECK(inner_calls == 0);

    MergeStrategy passed = with_extra_compat(probe, [](const NodeView&, const NodeView&) {
        return true;
    });
    CHECK(passed.local_compatibility(v, v));
    CHECK(inner_calls == 1);

    MergeStrategy inner_veto;
    inner_veto.local_compatibility = [](const NodeView&, const NodeView&) { return false; };
    MergeStrategy both = with_extra_compat(inner_veto, [](const NodeView&, const NodeView&) {
        return true;
    });
    CHECK_FALSE(both.local_compatibility(v, v));

    // A base without its own predicate is fine; everything else survives the
    // wrap untouched.
    MergeStrategy wrapped_rpni =
        with_extra_compat(rpni_strategy(), [](const NodeView&, const NodeView&) { return true; });
    CHECK(wrapped_rpni.name == "rpni");
    CHECK(wrapped_rpni.local_compatibility(v, v));
    MergeStrategy wrapped_edsm =
        with_extra_compat(edsm_strategy(), [](const NodeView&, const NodeView&) { return true; });
    CHECK(wrapped_edsm.name == "edsm");
    CHECK(wrapped_edsm.score_function);
}

TEST_CASE("parity conjoined with ioalergia needs both to pass") {
    // A chain of l-steps: state k sits k locks deep, so k mod 2 is its
    // l-parity. Distributions all agree except three locks deep.
    Iofa m;
    Symbol l = m.inputs().intern("l");
    Symbol o = m.outputs().intern("o");
    StateId prev = 0;
    std::vector<StateId> depth{0};
    for (int k = 1; k <= 5; ++k) {
        prev = m.add_state(prev, l, o);
        depth.push_back(prev);
    }
    add_dist(m, depth[1], "d", {{"A", 100}});
    add_dist(m, depth[2], "d", {{"A", 100}});
    add_dist(m, depth[3], "d", {{"N", 100}});
    add_dist(m, depth[5], "d", {{"A", 100}});

    MergeStrategy conj = with_extra_compat(ioalergia_strategy({0.05}), parity_compat);
    auto ok = [&](StateId a, StateId b) {
        return conj.local_compatibility(NodeView(m, a), NodeView(m, b));
    };
    CHECK_FALSE(ok(depth[1], depth[2]));  // parity veto despite equal distributions
    CHECK_FALSE(ok(depth[1], depth[3]));  // parity passes, distributions clash
    CHECK(ok(depth[1], depth[5]));        // both agree
}

TEST_CASE("binomial upper tail handles the edges exactly") {
    CHECK(binomial_upper_tail(0, 0, 0.3) == 1.0);
    CHECK(binomial_upper_tail(0, 100, 0.01) == 1.0);
    CHECK(binomial_upper_tail(5, 4, 0.5) == 0.0);
    CHECK(binomial_upper_tail(1, 100, 0.0) == 0.0);
    CHECK(binomial_upper_tail(0, 10, 0.0) == 1.0);
    CHECK(binomial_upper_tail(3, 10, 1.0) == 1.0);
    CHECK(binomial_upper_tail(10, 10, 0.5) == doctest::Approx(0.0009765625).epsilon(1e-12));

    double prev = 1.0;
    for (std::uint64_t k = 0; k <= 30; ++k) {
        double tail = binomial_upper_tail(k, 30, 0.3);
        CHECK(tail <= prev + 1e-15);
        CHECK(tail <= 1.0);
        prev = tail;
    }
}

TEST_CASE("binomial upper tail matches direct summation") {
    CHECK(binomial_upper_tail(5, 100, 0.01) ==
          doctest::Approx(0.003432321587754515).epsilon(1e-12));
    CHECK(binomial_upper_tail(1, 100, 0.01) ==
          doctest::Approx(0.6339676587267705).epsilon(1e-12));
    CHECK(binomial_upper_tail(2, 20, 0.05) ==
          doctest::Approx(0.26416047505615015).epsilon(1e-12));
    CHECK(binomial_upper_tail(5, 10, 0.5) == doctest::Approx(0.623046875).epsilon(1e-12));
    CHECK(binomial_upper_tail(3, 7, 0.3) == doctest::Approx(0.3529305).epsilon(1e-12));

    testutil::Rand rng(20260818);
    for (int i = 0; i < 200; ++i) {
        std::uint64_t n = 1 + rng.below(400);
        std::uint64_t k = rng.below(n + 2);
        double p = 0.01 + rng.unit() * 0.98;
        double expected = direct_tail(k, n, p);
        double got = binomial_upper_tail(k, n, p);
        if (expected > 1e-290) {
            CHECK(std::fabs(got - expected) <= 1e-9 * expected);
        } else {
            CHECK(got <= 1e-280);
        }
    }
}

TEST_CASE("noisy score pools mismatches across classes into one test") {
    Iofa m;
    m.inputs().intern("d");
    m.inputs().intern("e");
    m.outputs().intern("a");
    m.outputs().intern("b");
    StateId s1 = m.add_state(0, m.inputs().lookup("d"), m.outputs().lookup("a"));

    // 5 of 100 steps off the dominant output at 1% noise: implausible.
    Partition heavy = partition_of({class_with(m, 0, {0, s1}, "d", {{"a", 95}, {"b", 5}})});
    CHECK(noisy_nd_score(m, heavy, {0.01, 0.05}).is_reject());

    // 1 of 100 is fine, and the score is the tail probability itself.
    Partition light = partition_of({class_with(m, 0, {0, s1}, "d", {{"a", 99}, {"b", 1}})});
    Score s = noisy_nd_score(m, light, {0.01, 0.05});
    CHECK(s.kind == Score::Kind::value);
    CHECK(s.value == doctest::Approx(0.6339676587267705).epsilon(1e-9));

    // Two classes contribute to a single pooled test, not one test each:
    // 2 mismatches out of 20 at 5% noise.
    Partition pooled = partition_of({class_with(m, 0, {0}, "d", {{"a", 9}, {"b", 1}}),
                                     class_with(m, s1, {s1}, "d", {{"a", 9}, {"b", 1}})});
    Score pooled_score = noisy_nd_score(m, pooled, {0.05, 0.05});
    CHECK(pooled_score.kind == Score::Kind::value);
    CHECK(pooled_score.value == doctest::Approx(0.26416047505615015).epsilon(1e-9));

    // The dominant output is chosen per input within a class.
    PartitionClass two_inputs = class_with(m, 0, {0, s1}, "d", {{"a", 9}, {"b", 1}});
    Symbol e = m.inputs().lookup("e");
    Symbol b_out = m.outputs().lookup("b");
    two_inputs.transitions.obtain(e).obtain(b_out) = TransitionInfo{0, kNoState, 10, 0};
    Score per_input = noisy_nd_score(m, partition_of({two_inputs}), {0.05, 0.05});
    CHECK(per_input.value == doctest::Approx(0.6415140775914577).epsilon(1e-9));

    // No mismatches at all scores 1.
    Partition clean = partition_of({class_with(m, 0, {0, s1}, "d", {{"a", 7}})});
    Score clean_score = noisy_nd_score(m, clean, {0.01, 0.05});
    CHECK(clean_score.kind == Score::Kind::value);
    CHECK(clean_score.value == 1.0);
    CHECK(noisy_nd_score(m, Partition{}, {0.01, 0.05}).value == 1.0);
}

TEST_CASE("noisy strategy is a pure score function") {
    MergeStrategy s = noisy_strategy({0.01, 0.05});
    CHECK(s.name == "noisy");
    CHECK_FALSE(s.local_compatibility);
    REQUIRE(s.score_function);

    Iofa m;
    m.inputs().intern("d");
    m.outputs().intern("a");
    m.outputs().intern("b");
    Partition heavy = partition_of({class_with(m, 0, {0}, "d", {{"a", 95}, {"b", 5}})});
    CHECK(s.score_function(m, heavy).is_reject());
}

TEST_CASE("dominant output postprocess keeps the heaviest output per input") {
    Iofa m;
    Symbol x = m.inputs().intern("x");
    Symbol a = m.outputs().intern("a");
    Symbol b = m.outputs().intern("b");
    StateId s1 = m.add_state(0, x, a);
    StateId s2 = m.add_state(0, x, b);
    m.state(0).transitions.obtain(x).obtain(a) = TransitionInfo{s1, s1, 9, 9};
    m.state(0).transitions.obtain(x).obtain(b) = TransitionInfo{s2, s2, 1, 1};
    Symbol y = m.inputs().intern("y");
    Symbol c = m.outputs().intern("c");
    StateId s3 = m.add_state(s2, y, c);
    m.state(s2).transitions.obtain(y).obtain(c) = TransitionInfo{s3, s3, 1, 1};

    dominant_output_postprocess(m);

    CHECK(m.live_states() == std::vector<StateId>{0, s1});
    CHECK_FALSE(m.is_live(s2));
    CHECK_FALSE(m.is_live(s3));  // unreachable through the dropped edge
    const OutMap* slot = m.state(0).transitions.find(x);
    REQUIRE(slot);
    CHECK(slot->size() == 1);
    const TransitionInfo* kept = slot->find(a);
    REQUIRE(kept);
    CHECK(kept->count == 9);
    CHECK(is_deterministic(m));
}

TEST_CASE("dominant output postprocess ties to the textually smallest output") {
    // Intern in reverse order so textual order and symbol order disagree.
    Iofa m;
    Symbol x = m.inputs().intern("x");
    Symbol b = m.outputs().intern("b");
    Symbol a = m.outputs().intern("a");
    StateId s1 = m.add_state(0, x, b);
    StateId s2 = m.add_state(0, x, a);
    m.state(0).transitions.obtain(x).obtain(b) = TransitionInfo{s1, s1, 5, 5};
    m.state(0).transitions.obtain(x).obtain(a) = TransitionInfo{s2, s2, 5, 5};

    dominant_output_postprocess(m);

    const OutMap* slot = m.state(0).transitions.find(x);
    REQUIRE(slot);
    CHECK(slot->size() == 1);
    CHECK(slot->find(a) != nullptr);
    CHECK(m.is_live(s2));
    CHECK_FALSE(m.is_live(s1));
}

TEST_CASE("dominant output postprocess leaves deterministic models alone") {
    Iofa m;
    Symbol x = m.inputs().intern("x");
    Symbol a = m.outputs().intern("a");
    StateId s1 = m.add_state(0, x, a);
    m.state(0).transitions.obtain(x).obtain(a) = TransitionInfo{s1, s1, 3, 3};
    std::uint64_t version = m.version();

    dominant_output_postprocess(m);

    CHECK(m.version() == version);
    CHECK(m.live_states() == std::vector<StateId>{0, s1});
    CHECK(m.state(0).transitions.find(x)->find(a)->count == 3);
}
