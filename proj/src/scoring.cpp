#include "gsm/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <unordered_set>
#include <vector>

namespace gsm {

MergeStrategy rpni_strategy() {
    MergeStrategy s;
    s.name = "rpni";
    return s;
}

std::int64_t edsm_score(const Partition& partition) {
    std::int64_t merged = 0;
    for (const auto& cls : partition.classes) merged += static_cast<std::int64_t>(cls.members.size());
    return merged - static_cast<std::int64_t>(partition.classes.size());
}

MergeStrategy edsm_strategy() {
    MergeStrategy s;
    s.name = "edsm";
    s.score_function = [](const Iofa&, const Partition& p) {
        return Score::of(static_cast<double>(edsm_score(p)));
    };
    return s;
}

bool hoeffding_compat(std::uint64_t f1, std::uint64_t n1, std::uint64_t f2, std::uint64_t n2,
                      double epsilon) {
    if (n1 == 0 || n2 == 0) return true;
    double diff = std::abs(static_cast<double>(f1) / static_cast<double>(n1) -
                           static_cast<double>(f2) / static_cast<double>(n2));
    double bound = std::sqrt(std::log(2.0 / epsilon) / 2.0) *
                   (1.0 / std::sqrt(static_cast<double>(n1)) +
                    1.0 / std::sqrt(static_cast<double>(n2)));
    return diff < bound;
}

bool ioalergia_compat(const NodeView& a, const NodeView& b, const HoeffdingParams& params) {
    bool ok = true;
    a.each_input([&](Symbol in) {
        if (!ok || !b.has_input(in)) return;
        std::uint64_t n1 = a.total(in);
        std::uint64_t n2 = b.total(in);
        a.each_output(in, [&](Symbol out, std::uint64_t f1) {
            if (!ok) return;
            ok = hoeffding_compat(f1, n1, b.count(in, out), n2, params.epsilon);
        });
        b.each_output(in, [&](Symbol out, std::uint64_t f2) {
            if (!ok || a.count(in, out) > 0) return;
            ok = hoeffding_compat(0, n1, f2, n2, params.epsilon);
        });
    });
    return ok;
}

MergeStrategy ioalergia_strategy(HoeffdingParams params) {
    MergeStrategy s;
    s.name = "ioalergia";
    s.local_compatibility = [params](const NodeView& a, const NodeView& b) {
        return ioalergia_compat(a, b, params);
    };
    return s;
}

std::function<Score(const Iofa&, const Partition&)> local_to_global_compatibility(
    std::function<bool(const NodeView&, const NodeView&)> compat) {
    return [compat = std::move(compat)](const Iofa& m, const Partition& p) -> Score {
        for (const auto& cls : p.classes) {
            NodeView class_view(m, cls);
            for (StateId q : cls.members)
                if (!compat(NodeView(m, q), class_view)) return Score::reject();
        }
        return Score::accept();
    };
}

MergeStrategy ioalergia_partition_strategy(HoeffdingParams params) {
    MergeStrategy s;
    s.name = "ioalergia-partition";
    s.score_function = local_to_global_compatibility(
        [params](const NodeView& a, const NodeView& b) { return ioalergia_compat(a, b, params); });
    return s;
}

MergeStrategy ioalergia_edsm_strategy(HoeffdingParams params) {
    auto evidence = std::make_shared<std::uint64_t>(0);
    MergeStrategy s;
    s.name = "ioalergia-edsm";
    s.local_compatibility = [params, evidence](const NodeView& a, const NodeView& b) {
        ++*evidence;
        return ioalergia_compat(a, b, params);
    };
    s.score_function = [evidence](const Iofa&, const Partition&) {
        return Score::of(static_cast<double>(*evidence));
    };
    s.reset = [evidence] { *evidence = 0; };
    return s;
}

bool parity_compat(const NodeView& a, const NodeView& b) {
    if (!a.is_state() || !b.is_state()) return true;
    const Iofa& m = a.model();
    Symbol lock = m.inputs().lookup("l");
    Symbol door = m.inputs().lookup("d");
    auto parities = [&](const NodeView& v) {
        int lp = 0, dp = 0;
        for (const auto& [in, out] : v.model().prefix(v.state_id())) {
            (void)out;
            if (in == lock) lp ^= 1;
            if (in == door) dp ^= 1;
        }
        return std::pair<int, int>{lp, dp};
    };
    return parities(a) == parities(b);
}

MergeStrategy with_extra_compat(MergeStrategy base,
                                std::function<bool(const NodeView&, const NodeView&)> extra) {
    auto inner = std::move(base.local_compatibility);
    base.local_compatibility = [extra = std::move(extra), inner = std::move(inner)](
                                   const NodeView& a, const NodeView& b) {
        if (!extra(a, b)) return false;
        return !inner || inner(a, b);
    };
    return base;
}

double binomial_upper_tail(std::uint64_t k, std::uint64_t n, double p) {
    if (k == 0) return 1.0;
    if (k > n) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;

    double logp = std::log(p);
    double logq = std::log1p(-p);
    double nd = static_cast<double>(n);
    auto log_pmf = [&](std::uint64_t j) {
        double jd = static_cast<double>(j);
        return std::lgamma(nd + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) +
               jd * logp + (nd - jd) * logq;
    };

    // Always sum the side of the distribution that excludes the mode, so the
    // terms decrease monotonically from the first one. The accumulation is
    // kept relative to that first term and exponentiated once at the end;
    // summing absolute terms instead would underflow whenever the starting
    // term is below the smallest normal double while the true tail is large.
    if (static_cast<double>(k) > nd * p) {
        double rel = 1.0;
        double term = 1.0;
        for (std::uint64_t j = k; j < n; ++j) {
            term *= (static_cast<double>(n - j) / static_cast<double>(j + 1)) * (p / (1.0 - p));
            rel += term;
            if (term <= rel * 1e-18) break;
        }
        return std::min(std::exp(log_pmf(k) + std::log(rel)), 1.0);
    }

    double rel = 1.0;
    double term = 1.0;
    for (std::uint64_t j = k - 1; j > 0; --j) {
        term *= (static_cast<double>(j) / (nd - static_cast<double>(j) + 1.0)) *
                ((1.0 - p) / p);
        rel += term;
        if (term <= rel * 1e-18) break;
    }
    double lower = std::min(std::exp(log_pmf(k - 1) + std::log(rel)), 1.0);
    return std::max(0.0, 1.0 - lower);
}

namespace {

Symbol main_output(const Iofa& m, const OutMap& outs, bool live_counts) {
    Symbol main;
    std::uint64_t best = 0;
    for (const auto& [out, rec] : outs) {
        std::uint64_t c = live_counts ? rec.count : rec.original_count;
        if (c == 0) continue;
        if (!main.valid() || c > best ||
            (c == best && m.outputs().text(out) < m.outputs().text(main))) {
            main = out;
            best = c;
        }
    }
    return main;
}

std::uint64_t count_mismatches(const Iofa& m, const TransMap& transitions, std::uint64_t* total) {
    std::uint64_t mismatches = 0;
    for (const auto& [in, outs] : transitions) {
        (void)in;
        Symbol main = main_output(m, outs, true);
        for (const auto& [out, rec] : outs) {
            if (total) *total += rec.count;
            if (out != main) mismatches += rec.count;
        }
    }
    return mismatches;
}

}  // namespace

Score noisy_nd_score(const Iofa& m, const Partition& partition, const NoisyParams& params) {
    // The candidate is judged by the disagreement it introduces: pooled
    // mismatches of the folded classes minus the mismatches their members
    // already carry on their own. Disagreements absorbed by earlier merges
    // stay attributed to those merges instead of recounting against every
    // later candidate that touches the same class.
    std::uint64_t pooled = 0;
    std::uint64_t total = 0;
    std::uint64_t carried = 0;
    for (const auto& cls : partition.classes) {
        pooled += count_mismatches(m, cls.transitions, &total);
        for (StateId member : cls.members)
            if (member < m.arena_size())
                carried += count_mismatches(m, m.state(member).transitions, nullptr);
    }
    std::uint64_t fresh = pooled > carried ? pooled - carried : 0;
    double prob = binomial_upper_tail(fresh, total, params.error_rate);
    if (prob < params.threshold) return Score::reject();
    return Score::of(prob);
}

MergeStrategy noisy_strategy(NoisyParams params) {
    MergeStrategy s;
    s.name = "noisy";
    s.score_function = [params](const Iofa& m, const Partition& p) {
        return noisy_nd_score(m, p, params);
    };
    return s;
}

void dominant_output_postprocess(Iofa& m) {
    for (StateId s : m.live_states()) {
        for (auto& [in, outs] : m.state(s).transitions) {
            (void)in;
            if (outs.size() <= 1) continue;
            Symbol main = main_output(m, outs, true);
            std::vector<Symbol> drop;
            for (const auto& [out, rec] : outs) {
                (void)rec;
                if (out != main) drop.push_back(out);
            }
            for (Symbol out : drop) outs.erase(out);
        }
    }
    prune_unreachable(m);
}

}  // namespace gsm
