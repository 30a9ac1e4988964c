#pragma once

// The acceptance battery. `opcascade verify` and the acceptance test binary
// both run this; each check prints one line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <functional>
#include <future>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "opcascade/cases.hpp"
#include "opcascade/engine.hpp"
#include "opcascade/metrics.hpp"
#include "opcascade/network.hpp"
#include "opcascade/service.hpp"
#include "opcascade/simulation.hpp"
#include "opcascade/state_core.hpp"
#include "opcascade/trace_io.hpp"
#include "opcascade/verify/dense_oracle.hpp"
#include "opcascade/verify/ic_oracle.hpp"

namespace opcascade::verify {

struct CheckResult {
    std::string id;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

struct AcceptanceOptions {
    double spectral_tol = 1e-6;
    std::string filter;  // comma-separated check ids; empty runs all
    std::uint64_t seed = 20240917;
    std::size_t ic_graphs = 10;
    std::size_t ic_runs = 100000;
    double ic_tol = 0.01;
    std::size_t phase_runs = 1000;
    std::size_t state_cases = 10000;
    std::size_t sweep_seeds = 5;
};

// Posts need non-empty text; the cascade checks do not care what it says.
class FixedTextProvider final : public TextProvider {
public:
    explicit FixedTextProvider(ProviderDims dims) : TextProvider(dims) {}
    std::string name() const override { return "fixed"; }

protected:
    Vector do_embed(std::string_view) override {
        Vector v(dims().embedding, 0.0);
        v[0] = 1.0;
        return v;
    }
    Vector do_emote(std::string_view) override { return Vector(dims().emotion, 0.0); }
    std::string do_generate_post(const AgentProfile&, const StateSummary&, const Message&) override { return "ok"; }
};

// Holds generate_post until released; lets a test park a round mid-step.
class GatedProvider final : public TextProvider {
public:
    explicit GatedProvider(ProviderDims dims) : TextProvider(dims), inner_(dims) {}
    std::string name() const override { return "gated"; }

    void wait_entered() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [this] { return entered_; });
    }
    void release() {
        std::lock_guard lock(mu_);
        open_ = true;
        cv_.notify_all();
    }

protected:
    Vector do_embed(std::string_view t) override { return inner_.embed(t); }
    Vector do_emote(std::string_view t) override { return inner_.emote(t); }
    std::string do_generate_post(const AgentProfile& a, const StateSummary& s, const Message& m) override {
        std::unique_lock lock(mu_);
        entered_ = true;
        cv_.notify_all();
        cv_.wait(lock, [this] { return open_; });
        return inner_.generate_post(a, s, m);
    }

private:
    DeterministicLocalProvider inner_;
    std::mutex mu_;
    std::condition_variable cv_;
    bool entered_ = false;
    bool open_ = false;
};

namespace detail {

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// A World wired so that every edge fires with probability p:
// w1 = w2 = w3 = 0, w4 = 1, I = 1 for everyone, theta = 0, bias = logit(p) - 1.
inline World ic_world(std::size_t n, const std::vector<Edge>& edges, double p, std::uint64_t seed,
                      const std::shared_ptr<TextProvider>& provider) {
    SimulationConfig cfg;
    cfg.seed = seed;
    cfg.num_agents = n;
    cfg.rounds = n + 1;
    cfg.embedding_dim = 2;
    cfg.emotion_dim = 1;
    cfg.post_probability = 1.0;
    cfg.memory_capacity = n + 1;
    cfg.max_messages_per_agent_per_round = n * n + 1;
    cfg.platforms = {PlatformParams{"ic", 0.0, 0.0, 0.0, 1.0, logit(p) - 1.0}};
    std::vector<AgentProfile> profiles(n);
    std::vector<AgentState> states;
    for (std::size_t i = 0; i < n; ++i) {
        profiles[i].agent_id = "a" + std::to_string(i);
        profiles[i].platform = "ic";
        profiles[i].followers = 1;
        profiles[i].params.theta = 0.0;
        states.push_back(AgentState{{1.0, 0.0}, {0.0}, EpisodicMemory(n + 1)});
    }
    calibrate_influence(profiles);
    EngineOptions opts;
    opts.track_reproduction = false;
    return World(cfg, std::move(profiles), std::move(states), {PlatformNetwork("ic", n, edges)}, provider, opts);
}

inline void seed_cascade(World& w, std::size_t source) {
    Injection inj;
    inj.message.id = "seed";
    inj.message.cascade_id = "seed";
    inj.message.author = w.profiles()[source].agent_id;
    inj.message.platform = "ic";
    inj.message.round = 1;
    inj.message.content_embedding = Vector{1.0, 0.0};
    inj.message.emotion = Vector{0.0};
    inj.sender = source;
    inj.sender_influence = 1.0;
    const auto out = w.network("ic").receivers_of(source);
    inj.targets = Targets::only(std::vector<std::size_t>(out.begin(), out.end()));
    w.schedule(std::move(inj));
}

inline bool quiet(const World& w) {
    for (std::size_t i = 0; i < w.config().num_agents; ++i) {
        if (w.inbox_size(i) > 0) return false;
    }
    return w.scheduled_for(w.next_round()).empty();
}

// One-sided exact binomial tail P(X >= k), X ~ Bin(n, 1/2).
inline double binomial_upper_tail(std::size_t k, std::size_t n) {
    double total = 0.0;
    for (std::size_t j = k; j <= n; ++j) {
        const double logc = std::lgamma(static_cast<double>(n) + 1) - std::lgamma(static_cast<double>(j) + 1) -
                            std::lgamma(static_cast<double>(n - j) + 1);
        total += std::exp(logc - static_cast<double>(n) * std::log(2.0));
    }
    return std::min(1.0, total);
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace detail

// --- IC reduction -----------------------------------------------------------

inline CheckResult check_ic(const AcceptanceOptions& o) {
    CheckResult res{"ic", "IC-reduction equivalence vs exhaustive enumeration", true, "", 0, 120};
    Rng rng = Rng::derive(o.seed, StreamTag::network, {0x1c});
    auto provider = std::make_shared<FixedTextProvider>(ProviderDims{2, 1});
    double worst = 0.0;
    for (std::size_t g = 0; g < o.ic_graphs; ++g) {
        const std::size_t n = 4 + static_cast<std::size_t>(rng.below(4));  // 4..7 nodes
        const std::size_t max_edges = std::min<std::size_t>(12, n * (n - 1));
        const std::size_t m = n - 1 + static_cast<std::size_t>(rng.below(max_edges - (n - 1) + 1));
        std::vector<Edge> edges;
        std::vector<IcEdge> ic;
        const double p = rng.uniform(0.2, 0.8);
        // first edge leaves the seed node so the cascade is never trivial
        const std::size_t first = 1 + static_cast<std::size_t>(rng.below(n - 1));
        edges.push_back({first, 0});
        while (edges.size() < m) {
            const std::size_t s = static_cast<std::size_t>(rng.below(n));
            const std::size_t r = static_cast<std::size_t>(rng.below(n));
            if (s == r) continue;
            const Edge e{r, s};
            if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
        }
        for (const auto& e : edges) ic.push_back({e.sender, e.receiver, p});
        const auto exact = ic_activation_exact(n, ic, {0});

        std::vector<std::size_t> hits(n, 0);
        for (std::size_t run = 0; run < o.ic_runs; ++run) {
            World w = detail::ic_world(n, edges, p, opcascade::detail::mix64(o.seed ^ (g << 40) ^ run), provider);
            detail::seed_cascade(w, 0);
            std::vector<char> active(n, 0);
            active[0] = 1;
            while (!detail::quiet(w)) {
                const RoundTrace t = w.step_round(w.next_round());
                for (const auto& e : t.engagements) {
                    if (e.engaged) active[e.agent] = 1;
                }
            }
            for (std::size_t i = 0; i < n; ++i) hits[i] += active[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double freq = static_cast<double>(hits[i]) / static_cast<double>(o.ic_runs);
            worst = std::max(worst, std::abs(freq - exact[i]));
        }
    }
    res.passed = worst <= o.ic_tol;
    res.detail = std::to_string(o.ic_graphs) + " graphs x " + std::to_string(o.ic_runs) +
                 " runs, max |freq - exact| = " + detail::fmt(worst) + " (tol " + detail::fmt(o.ic_tol) + ")";
    return res;
}

// --- Spectral oracle ----------------------------------------------------------

inline CheckResult check_spectral(const AcceptanceOptions& o) {
    CheckResult res{"spectral", "spectral radius vs dense eigensolver + closed forms", true, "", 0, 10};
    Rng rng = Rng::derive(o.seed, StreamTag::sampling, {0x5e});
    double worst = 0.0;
    std::size_t unconverged = 0;
    for (int k = 0; k < 100; ++k) {
        DenseMatrix m(10);
        const double density = rng.uniform(0.15, 1.0);
        for (std::size_t i = 0; i < 10; ++i) {
            for (std::size_t j = 0; j < 10; ++j) {
                if (rng.uniform01() < density) m(i, j) = rng.uniform01();
            }
        }
        const SpectralEstimate est = spectral_radius(m);
        if (!est.converged) ++unconverged;
        worst = std::max(worst, std::abs(est.value - spectral_radius_dense_oracle(m)));
    }
    // closed forms
    double closed = 0.0;
    closed = std::max(closed, std::abs(spectral_radius(DenseMatrix(10)).value - 0.0));
    DenseMatrix cycle(2);
    cycle(0, 1) = cycle(1, 0) = 0.5;
    closed = std::max(closed, std::abs(spectral_radius(cycle).value - 0.5));
    DenseMatrix complete(3, 0.6);
    for (std::size_t i = 0; i < 3; ++i) complete(i, i) = 0.0;
    closed = std::max(closed, std::abs(spectral_radius(complete).value - 1.2));
    DenseMatrix complete20(20, 0.05);
    for (std::size_t i = 0; i < 20; ++i) complete20(i, i) = 0.0;
    closed = std::max(closed, std::abs(spectral_radius(complete20).value - 0.95));

    res.passed = worst <= o.spectral_tol && closed <= 1e-9 && unconverged == 0;
    res.detail = "100 random 10x10: max err " + detail::fmt(worst) + " (tol " + detail::fmt(o.spectral_tol) +
                 "), closed forms max err " + detail::fmt(closed) + ", unconverged " + std::to_string(unconverged);
    return res;
}

// --- Phase behavior -------------------------------------------------------------

inline CheckResult check_phase(const AcceptanceOptions& o) {
    CheckResult res{"phase", "supercritical growth / subcritical decay on complete digraphs", true, "", 0, 60};
    const std::size_t n = 20;
    std::vector<Edge> edges;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t s = 0; s < n; ++s) {
            if (r != s) edges.push_back({r, s});
        }
    }
    auto provider = std::make_shared<FixedTextProvider>(ProviderDims{2, 1});
    std::ostringstream detail_text;
    for (double r0 : {1.5, 0.5}) {
        const double p = r0 / static_cast<double>(n - 1);
        std::size_t up = 0, down = 0;
        std::vector<double> mean_gen(4, 0.0);
        for (std::size_t run = 0; run < o.phase_runs; ++run) {
            World w = detail::ic_world(n, edges, p, opcascade::detail::mix64(o.seed ^ 0xfa5e ^ (run << 8) ^ static_cast<std::uint64_t>(r0 * 10)), provider);
            detail::seed_cascade(w, 0);
            std::vector<double> gen{1.0};
            while (!detail::quiet(w) && gen.size() < 4) gen.push_back(static_cast<double>(w.step_round(w.next_round()).engaged_count()));
            gen.resize(4, 0.0);
            for (std::size_t g = 0; g < 4; ++g) mean_gen[g] += gen[g] / static_cast<double>(o.phase_runs);
            if (gen[1] > gen[0]) ++up;
            if (gen[1] < gen[0]) ++down;
        }
        const bool grow = r0 > 1.0;
        const std::size_t informative = up + down;
        const double pval = detail::binomial_upper_tail(grow ? up : down, informative);
        const bool direction = grow ? mean_gen[1] > mean_gen[0] : mean_gen[1] < mean_gen[0];
        const bool ok = pval < 0.01 && direction;
        res.passed = res.passed && ok;
        detail_text << "p(n-1)=" << r0 << ": mean gens " << detail::fmt(mean_gen[0]) << "," << detail::fmt(mean_gen[1]) << ","
                    << detail::fmt(mean_gen[2]) << "," << detail::fmt(mean_gen[3]) << " sign test " << (grow ? up : down) << "/"
                    << informative << " p=" << detail::fmt(pval) << (r0 > 1.0 ? "; " : "");
    }
    res.detail = detail_text.str();
    return res;
}

// --- State invariants -----------------------------------------------------------

inline CheckResult check_state(const AcceptanceOptions& o) {
    CheckResult res{"state", "dual-update and recall invariants", true, "", 0, 10};
    Rng rng = Rng::derive(o.seed, StreamTag::agent, {0x57a7e});
    double worst_norm = 0.0, worst_orth = 0.0, worst_affect_excess = 0.0, worst_wsum = 0.0;
    std::size_t monotonic_failures = 0;
    for (std::size_t c = 0; c < o.state_cases; ++c) {
        const std::size_t d = 2 + static_cast<std::size_t>(rng.below(31));
        const std::size_t k = 1 + static_cast<std::size_t>(rng.below(8));
        AgentParams params;
        params.eta = rng.uniform(0.05, 0.95);
        params.gamma = rng.uniform(0.01, params.eta);  // gamma <= eta
        params.alpha = rng.uniform(0.1, 5.0);
        params.beta = rng.uniform(0.1, 8.0);
        params.delta = rng.uniform(0.05, 0.95);
        Vector z(d), x(d), r(k), q(k);
        for (double& v : z) v = rng.normal();
        for (double& v : x) v = rng.normal();
        normalize_in_place(z);
        normalize_in_place(x);
        for (double& v : r) v = rng.uniform(-1.0, 1.0);
        for (double& v : q) v = rng.uniform(-1.0, 1.0);
        const DualStep s = dual_step(z, r, x, q, params);
        worst_norm = std::max(worst_norm, std::abs(norm2(s.persona) - 1.0));
        worst_orth = std::max(worst_orth, std::abs(dot(s.increment, z)));
        for (double a : s.affect) worst_affect_excess = std::max(worst_affect_excess, std::abs(a) - 1.0);

        // recall: random memory, plus two monotonicity probes
        const std::size_t m = 1 + static_cast<std::size_t>(rng.below(12));
        std::vector<MemoryRecord> mem;
        for (std::size_t j = 0; j < m; ++j) {
            Vector e(d);
            for (double& v : e) v = rng.normal();
            normalize_in_place(e);
            mem.push_back({e, q, e, static_cast<Round>(j)});
        }
        const Round now = m + static_cast<Round>(rng.below(3));
        const Vector w = retrieval_weights(mem, x, now, params);
        double total = 0.0;
        for (double v : w) total += v;
        worst_wsum = std::max(worst_wsum, std::abs(total - 1.0));

        // same content, older round -> smaller weight
        std::vector<MemoryRecord> pair{{x, q, x, 0}, {x, q, x, 1}};
        const Vector wr = retrieval_weights(pair, x, 2, params);
        if (!(wr[0] < wr[1])) ++monotonic_failures;
        // same round, more similar content -> larger weight
        Vector y = project_tangent(mem[0].content_embedding.vec(), x);
        if (norm2(y) > 1e-9) {
            normalize_in_place(y);
            std::vector<MemoryRecord> sim{{x, q, x, 0}, {y, q, y, 0}};
            const Vector ws = retrieval_weights(sim, x, 1, params);
            if (!(ws[0] > ws[1])) ++monotonic_failures;
        }
    }
    res.passed = worst_norm <= 1e-9 && worst_orth <= 1e-9 && worst_affect_excess <= 0.0 && worst_wsum <= 1e-9 &&
                 monotonic_failures == 0;
    res.detail = std::to_string(o.state_cases) + " cases: |norm-1| " + detail::fmt(worst_norm) + ", |<dz,z>| " +
                 detail::fmt(worst_orth) + ", affect excess " + detail::fmt(std::max(0.0, worst_affect_excess)) +
                 ", |sum w - 1| " + detail::fmt(worst_wsum) + ", monotonicity failures " +
                 std::to_string(monotonic_failures);
    return res;
}

// --- Hand-computed dual update ------------------------------------------------------

inline CheckResult check_dual(const AcceptanceOptions&) {
    CheckResult res{"dual", "hand-computed dual update (d=2, K=1)", true, "", 0, 1};
    AgentParams params;
    params.alpha = 1.0;
    params.gamma = 0.1;
    params.eta = 0.9;
    const DualStep s = dual_step(Vector{1.0, 0.0}, Vector{1.0}, Vector{0.0, 1.0}, Vector{1.0}, params);
    // Frozen from an independent scalar computation.
    const double z0 = 0.9973384305357951, z1 = 0.07291128154405782, gate = 0.7310585786300049;
    const double err = std::max({std::abs(s.persona[0] - z0), std::abs(s.persona[1] - z1), std::abs(s.affect[0] - 0.9),
                                 std::abs(s.gate - gate)});
    res.passed = err <= 1e-6;
    res.detail = "z' = (" + detail::fmt(s.persona[0]) + ", " + detail::fmt(s.persona[1]) + "), r' = " +
                 detail::fmt(s.affect[0]) + ", max err " + detail::fmt(err);
    return res;
}

// --- Metric properties --------------------------------------------------------------

inline CheckResult check_metrics(const AcceptanceOptions& o) {
    CheckResult res{"metrics", "JSD and Pearson properties", true, "", 0, 5};
    Rng rng = Rng::derive(o.seed, StreamTag::sampling, {0x3e7});
    const auto labels = default_stance_labels();
    auto random_dist = [&] {
        Vector p(3);
        double t = 0.0;
        for (double& v : p) t += (v = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01());
        if (t == 0.0) {
            p = {1.0, 0.0, 0.0};
            t = 1.0;
        }
        for (double& v : p) v /= t;
        return StanceDistribution{labels, p};
    };
    std::vector<std::string> failures;
    for (int k = 0; k < 100; ++k) {
        const auto p = random_dist();
        const auto q = random_dist();
        const double a = jsd(p, q), b = jsd(q, p);
        if (!(a >= 0.0 && a <= 1.0)) failures.push_back("range");
        if (a != b) failures.push_back("symmetry");
        if (jsd(p, p) != 0.0) failures.push_back("identity");
        if (p.probabilities != q.probabilities && !(a > 0.0)) failures.push_back("strict positivity");
    }
    const StanceDistribution p2{{"a", "b"}, {1.0, 0.0}}, q2{{"a", "b"}, {0.0, 1.0}};
    if (std::abs(jsd(p2, q2) - 1.0) > 1e-12) failures.push_back("disjoint != 1");

    const Trajectory ta{{{1, 1.0}, {2, 2.0}, {3, 3.0}}}, tb{{{1, 1.0}, {2, 2.0}, {3, 4.0}}};
    const double r = pearson_r(ta, tb);
    if (std::abs(r - 0.9819805060619656) > 1e-5) failures.push_back("derived pearson " + detail::fmt(r));
    for (int k = 0; k < 100; ++k) {
        Trajectory x, y;
        for (Round t = 0; t < 8; ++t) {
            x.points.push_back({t, rng.normal()});
            y.points.push_back({t, rng.normal()});
        }
        Trajectory xa = x;
        const double scale = rng.uniform(0.1, 10.0), shift = rng.uniform(-5.0, 5.0);
        for (auto& pt : xa.points) pt.value = scale * pt.value + shift;
        if (std::abs(pearson_r(x, y) - pearson_r(xa, y)) > 1e-12) failures.push_back("affine invariance");
    }
    try {
        (void)pearson_r(Trajectory{{{1, 2.0}, {2, 2.0}, {3, 2.0}}}, ta);
        failures.push_back("zero variance returned a value");
    } catch (const UndefinedCorrelation&) {
    }
    std::sort(failures.begin(), failures.end());
    failures.erase(std::unique(failures.begin(), failures.end()), failures.end());
    res.passed = failures.empty();
    std::string joined;
    for (const auto& f : failures) joined += (joined.empty() ? "" : ", ") + f;
    res.detail = failures.empty() ? "100 JSD pairs, 100 affine pairs, pearson((1,2,3),(1,2,4)) = " + detail::fmt(r)
                                  : "failed: " + joined;
    return res;
}

// --- Determinism + seed sweep ------------------------------------------------------------

inline std::string traces_bytes(const RunResult& run) {
    std::string out;
    for (const auto& t : run.traces) out += trace_to_json(t).dump() + "\n";
    return out;
}

inline CheckResult check_determinism(const AcceptanceOptions& o) {
    CheckResult res{"determinism", "flagship byte-identical reruns + seed sweep aggregation", true, "", 0, 300};
    const Scenario s = flagship_case();
    const ProviderDims dims{s.config.embedding_dim, s.config.emotion_dim};
    const auto a = run_scenario(s, 1, std::make_shared<DeterministicLocalProvider>(dims));
    const auto b = run_scenario(s, 1, std::make_shared<DeterministicLocalProvider>(dims));
    const std::string ba = traces_bytes(a.run), bb = traces_bytes(b.run);
    const bool identical = ba == bb && report_to_json(a.report).dump() == report_to_json(b.report).dump();

    std::vector<FidelityReport> reports;
    for (std::uint64_t seed = 1; seed <= o.sweep_seeds; ++seed) {
        reports.push_back(run_scenario(s, seed, std::make_shared<DeterministicLocalProvider>(dims)).report);
    }
    const FidelityReport agg = aggregate_seeds(reports);
    double r_sum = 0.0, j_sum = 0.0;
    for (const auto& r : reports) {
        r_sum += r.pearson_r.value_or(0.0);
        j_sum += r.jsd.value_or(0.0);
    }
    const double cnt = static_cast<double>(reports.size());
    double err = std::max(std::abs(agg.pearson_r.value_or(NAN) - r_sum / cnt), std::abs(agg.jsd.value_or(NAN) - j_sum / cnt));
    for (std::size_t k = 0; k < agg.distributions.size(); ++k) {
        for (std::size_t c = 0; c < 3; ++c) {
            double m = 0.0;
            for (const auto& r : reports) m += r.distributions[k].probabilities[c] / cnt;
            err = std::max(err, std::abs(agg.distributions[k].probabilities[c] - m));
        }
    }
    const bool per_seed_kept = agg.per_seed.size() == reports.size();
    res.passed = identical && err <= 1e-12 && per_seed_kept && !std::isnan(err);
    res.detail = std::string("100 agents x 10 rounds: reruns ") + (identical ? "byte-identical" : "DIFFER") + " (" +
                 std::to_string(ba.size()) + " bytes), " + std::to_string(o.sweep_seeds) +
                 "-seed aggregate max |mean - field| = " + detail::fmt(err) + ", mean r = " +
                 detail::fmt(agg.pearson_r.value_or(NAN)) + ", mean JSD = " + detail::fmt(agg.jsd.value_or(NAN));
    return res;
}

// --- Service contract (over real HTTP) --------------------------------------------------

inline CheckResult check_service(const AcceptanceOptions&) {
    CheckResult res{"service", "exactly-once stepping and snapshot isolation over HTTP", true, "", 0, 30};
    std::shared_ptr<GatedProvider> gated;
    ServiceOptions so;
    so.provider_factory = [&gated](const ProviderSpec&, ProviderDims dims) {
        gated = std::make_shared<GatedProvider>(dims);
        return gated;
    };
    Service service(so);
    HttpFrontend http(service);
    const int port = http.bind("127.0.0.1", 0);
    if (port <= 0) {
        res.passed = false;
        res.detail = "could not bind a local port";
        return res;
    }
    std::thread server([&http] { http.listen_after_bind(); });
    http.wait_until_ready();
    std::vector<std::string> problems;
    {
        httplib::Client cli("127.0.0.1", port);
        cli.set_read_timeout(30, 0);
        auto created = cli.Post("/v1/simulations", R"({"case":"minimal","seed":7})", "application/json");
        if (!created || created->status != 201) {
            problems.push_back("create failed");
        } else {
            const std::string id = nlohmann::json::parse(created->body)["id"].get<std::string>();
            const std::string base = "/v1/simulations/" + id;
            const std::string before = cli.Get(base + "/state")->body;

            // One step parks inside the provider; then a volley of competitors.
            auto first = std::async(std::launch::async, [&] {
                httplib::Client c("127.0.0.1", port);
                c.set_read_timeout(30, 0);
                auto r = c.Post(base + "/rounds", "", "application/json");
                return r ? r->status : -1;
            });
            gated->wait_entered();
            std::vector<std::future<int>> others;
            for (int k = 0; k < 8; ++k) {
                others.push_back(std::async(std::launch::async, [&] {
                    httplib::Client c("127.0.0.1", port);
                    auto r = c.Post(base + "/rounds", "", "application/json");
                    return r ? r->status : -1;
                }));
            }
            int conflicts = 0;
            for (auto& f : others) conflicts += f.get() == 409;
            std::vector<std::future<std::string>> readers;
            for (int k = 0; k < 4; ++k) {
                readers.push_back(std::async(std::launch::async, [&] {
                    httplib::Client c("127.0.0.1", port);
                    auto r = c.Get(base + "/state");
                    return r ? r->body : std::string();
                }));
            }
            int isolated = 0;
            for (auto& f : readers) isolated += f.get() == before;
            gated->release();
            const int first_status = first.get();
            const auto handle = nlohmann::json::parse(cli.Get(base)->body);
            const auto after = nlohmann::json::parse(cli.Get(base + "/state")->body);
            if (first_status != 200) problems.push_back("first step status " + std::to_string(first_status));
            if (conflicts != 8) problems.push_back(std::to_string(conflicts) + "/8 competitors got 409");
            if (isolated != 4) problems.push_back(std::to_string(isolated) + "/4 readers saw the pre-step snapshot");
            if (handle["current_round"] != 1) problems.push_back("current_round " + handle["current_round"].dump());
            if (after["round"] != 1) problems.push_back("state round after step " + after["round"].dump());
            res.detail = "1 step executed, " + std::to_string(conflicts) + "/8 concurrent POSTs -> 409, " +
                         std::to_string(isolated) + "/4 mid-step GETs saw round 0";
        }
    }
    http.stop();
    server.join();
    res.passed = problems.empty();
    if (!problems.empty()) {
        res.detail = "failed:";
        for (const auto& p : problems) res.detail += " " + p + ";";
    }
    return res;
}

// ------------------------------------------------------------------------------------------

struct NamedCheck {
    std::string id;
    std::function<CheckResult(const AcceptanceOptions&)> run;
};

inline std::vector<NamedCheck> acceptance_checks() {
    return {{"ic", check_ic},           {"spectral", check_spectral}, {"phase", check_phase},
            {"state", check_state},     {"dual", check_dual},           {"metrics", check_metrics},
            {"determinism", check_determinism}, {"service", check_service}};
}

inline bool filter_selects(const std::string& filter, const std::string& id) {
    std::size_t start = 0;
    while (start <= filter.size()) {
        const std::size_t comma = std::min(filter.find(',', start), filter.size());
        if (filter.compare(start, comma - start, id) == 0 && comma - start == id.size()) return true;
        start = comma + 1;
    }
    return false;
}

inline std::vector<CheckResult> run_acceptance(const AcceptanceOptions& o,
                                               const std::function<void(const CheckResult&)>& on_result = {}) {
    std::vector<CheckResult> out;
    for (const auto& c : acceptance_checks()) {
        if (!o.filter.empty() && !filter_selects(o.filter, c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c.run(o);
        } catch (const std::exception& e) {
            r = {c.id, c.id, false, std::string("threw: ") + e.what(), 0, 0};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.budget_seconds > 0 && r.seconds > r.budget_seconds) {
            r.passed = false;
            r.detail += " [over time budget " + detail::fmt(r.budget_seconds) + " s]";
        }
        if (on_result) on_result(r);
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string format_result(const CheckResult& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%-4s %-12s %8.2fs  ", r.passed ? "PASS" : "FAIL", r.id.c_str(), r.seconds);
    return head + r.name + ": " + r.detail;
}

}  // namespace opcascade::verify
