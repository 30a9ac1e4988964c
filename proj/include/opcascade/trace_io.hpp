#pragma once

// JSON and CSV encodings of traces and reports. Doubles go through
// nlohmann's shortest round-trip formatting, so equal values give equal bytes.

#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "opcascade/engine.hpp"
#include "opcascade/metrics.hpp"

namespace opcascade {

inline nlohmann::json trace_to_json(const RoundTrace& t) {
    using nlohmann::json;
    json engagements = json::array();
    for (const auto& e : t.engagements) {
        json j{{"agent", e.agent},
               {"message_id", e.message_id},
               {"cascade_id", e.cascade_id},
               {"probability", e.probability},
               {"engaged", e.engaged}};
        j["sender"] = e.sender ? json(*e.sender) : json(nullptr);
        j["post_id"] = e.post_id ? json(*e.post_id) : json(nullptr);
        engagements.push_back(std::move(j));
    }
    json posts = json::array();
    for (const auto& p : t.posts) {
        posts.push_back({{"message_id", p.message_id},
                         {"cascade_id", p.cascade_id},
                         {"author", p.author},
                         {"platform", p.platform},
                         {"posted_round", p.posted_round},
                         {"text", p.text},
                         {"recipients", p.recipients}});
    }
    json repro = json::array();
    for (const auto& r : t.reproduction) {
        repro.push_back({{"message_id", r.message_id},
                         {"platform", r.platform},
                         {"value", r.value},
                         {"converged", r.converged},
                         {"supercritical", r.supercritical}});
    }
    return {{"round", t.round},
            {"injected", t.injected},
            {"inbox_items", t.inbox_items},
            {"coalesced_items", t.coalesced_items},
            {"skipped_engaged", t.skipped_engaged},
            {"dropped_overflow", t.dropped_overflow},
            {"dropped_dormant", t.dropped_dormant},
            {"evaluated_edges", t.evaluated_edges},
            {"engaged", t.engaged_count()},
            {"engagements", engagements},
            {"posts", posts},
            {"reproduction", repro},
            {"notes", t.notes},
            {"rng_digest", t.rng_digest},
            {"rng_algorithm", t.rng_algorithm}};
}

inline RoundTrace trace_from_json(const nlohmann::json& j) {
    RoundTrace t;
    t.round = j.at("round").get<Round>();
    t.injected = j.at("injected").get<std::vector<std::string>>();
    t.inbox_items = j.at("inbox_items").get<std::size_t>();
    t.coalesced_items = j.at("coalesced_items").get<std::size_t>();
    t.skipped_engaged = j.at("skipped_engaged").get<std::size_t>();
    t.dropped_overflow = j.at("dropped_overflow").get<std::size_t>();
    t.dropped_dormant = j.at("dropped_dormant").get<std::size_t>();
    t.evaluated_edges = j.at("evaluated_edges").get<std::size_t>();
    for (const auto& e : j.at("engagements")) {
        EngagementRecord r;
        r.agent = e.at("agent").get<std::size_t>();
        r.message_id = e.at("message_id").get<std::string>();
        r.cascade_id = e.at("cascade_id").get<std::string>();
        if (!e.at("sender").is_null()) r.sender = e.at("sender").get<std::size_t>();
        r.probability = e.at("probability").get<double>();
        r.engaged = e.at("engaged").get<bool>();
        if (!e.at("post_id").is_null()) r.post_id = e.at("post_id").get<std::string>();
        t.engagements.push_back(std::move(r));
    }
    for (const auto& p : j.at("posts")) {
        t.posts.push_back({p.at("message_id").get<std::string>(), p.at("cascade_id").get<std::string>(),
                           p.at("author").get<std::size_t>(), p.at("platform").get<std::string>(),
                           p.at("posted_round").get<Round>(), p.at("text").get<std::string>(),
                           p.at("recipients").get<std::size_t>()});
    }
    for (const auto& r : j.at("reproduction")) {
        t.reproduction.push_back({r.at("message_id").get<std::string>(), r.at("platform").get<std::string>(),
                                  r.at("value").get<double>(), r.at("converged").get<bool>(),
                                  r.at("supercritical").get<bool>()});
    }
    t.notes = j.at("notes").get<std::vector<std::string>>();
    t.rng_digest = j.at("rng_digest").get<std::uint64_t>();
    t.rng_algorithm = j.at("rng_algorithm").get<std::string>();
    return t;
}

// Compact per-round view: counts plus per-platform maxima of R.
inline nlohmann::json trace_summary(const RoundTrace& t) {
    using nlohmann::json;
    std::map<std::string, double> max_r;
    for (const auto& r : t.reproduction) {
        auto [it, fresh] = max_r.emplace(r.platform, r.value);
        if (!fresh) it->second = std::max(it->second, r.value);
    }
    json repro = json::array();
    for (const auto& r : t.reproduction) {
        repro.push_back({{"message_id", r.message_id}, {"platform", r.platform}, {"value", r.value}});
    }
    return {{"round", t.round},
            {"injected", t.injected},
            {"evaluated_edges", t.evaluated_edges},
            {"engaged", t.engaged_count()},
            {"posts", t.posts.size()},
            {"skipped_engaged", t.skipped_engaged},
            {"dropped_overflow", t.dropped_overflow},
            {"dropped_dormant", t.dropped_dormant},
            {"reproduction", repro},
            {"max_reproduction", max_r},
            {"rng_digest", t.rng_digest}};
}

inline nlohmann::json trajectory_to_json(const Trajectory& t) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : t.points) out.push_back(nlohmann::json::array({p.round, p.value}));
    return out;
}

// r and JSD appear only when the scenario carries ground truth.
inline nlohmann::json report_to_json(const FidelityReport& r) {
    using nlohmann::json;
    json dists = json::array();
    for (const auto& d : r.distributions) dists.push_back({{"round", d.round}, {"probabilities", d.probabilities}});
    json repro = json::array();
    for (const auto& s : r.reproduction) {
        json values = json::array();
        for (const auto& p : s.values) values.push_back(json::array({p.round, p.value}));
        repro.push_back({{"message_id", s.message_id}, {"platform", s.platform}, {"values", values}});
    }
    json volumes = json::array();
    for (const auto& v : r.volumes) {
        volumes.push_back({{"cascade_id", v.cascade_id}, {"engagements", v.engagements}, {"posts", v.posts}});
    }
    json out{{"scenario", r.scenario},
             {"seeds", r.seeds},
             {"stance_labels", r.stance_labels},
             {"distributions", dists},
             {"trajectory", trajectory_to_json(r.trajectory)},
             {"negative_share", trajectory_to_json(r.negative_share)},
             {"has_ground_truth", r.has_ground_truth},
             {"reproduction", repro},
             {"reproduction_scope", r.reproduction_scope},
             {"message_volumes", volumes}};
    if (r.has_ground_truth) {
        out["correlated_series"] = r.correlated_series;
        out["pearson_r"] = r.pearson_r ? json(*r.pearson_r) : json(nullptr);
        if (r.pearson_note) out["pearson_note"] = *r.pearson_note;
        out["jsd"] = r.jsd ? json(*r.jsd) : json(nullptr);
        json per_seed = json::array();
        for (const auto& s : r.per_seed) {
            per_seed.push_back({{"seed", s.seed},
                                {"pearson_r", s.pearson_r ? json(*s.pearson_r) : json(nullptr)},
                                {"jsd", s.jsd ? json(*s.jsd) : json(nullptr)}});
        }
        out["per_seed"] = per_seed;
    }
    return out;
}

namespace detail {
inline std::string csv_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace detail

// round,opinion_index,negative_share
inline void write_trajectory_csv(std::ostream& out, const FidelityReport& r) {
    out << "round,opinion_index,negative_share\n";
    for (std::size_t k = 0; k < r.trajectory.points.size(); ++k) {
        const auto& p = r.trajectory.points[k];
        out << p.round << ',' << detail::csv_number(p.value) << ',';
        if (k < r.negative_share.points.size()) out << detail::csv_number(r.negative_share.points[k].value);
        out << '\n';
    }
}

// round,<label...>
inline void write_distribution_csv(std::ostream& out, const FidelityReport& r) {
    out << "round";
    for (const auto& l : r.stance_labels) out << ',' << l;
    out << '\n';
    for (const auto& d : r.distributions) {
        out << d.round;
        for (double p : d.probabilities) out << ',' << detail::csv_number(p);
        out << '\n';
    }
}

}  // namespace opcascade
