#pragma once

// HTTP control API (/v1) over simulation instances.
//
// Each instance has one execution permit (a mutex taken with try_lock): a
// POST /rounds that cannot take it answers 409 instead of waiting, so
// concurrent steps execute exactly once. Readers never touch the World; they
// copy a shared_ptr to the last published, immutable view.
//
// Service::dispatch is transport-free; HttpFrontend binds it to cpp-httplib.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "opcascade/cases.hpp"
#include "opcascade/error.hpp"
#include "opcascade/providers.hpp"
#include "opcascade/scenario.hpp"
#include "opcascade/simulation.hpp"
#include "opcascade/trace_io.hpp"

namespace opcascade {

enum class SimStatus { created, running_round, awaiting_input, finished, failed };

inline const char* to_string(SimStatus s) noexcept {
    switch (s) {
        case SimStatus::created: return "created";
        case SimStatus::running_round: return "running_round";
        case SimStatus::awaiting_input: return "awaiting_input";
        case SimStatus::finished: return "finished";
        case SimStatus::failed: return "failed";
    }
    return "failed";
}

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

using ProviderFactory = std::function<std::shared_ptr<TextProvider>(const ProviderSpec&, ProviderDims)>;

struct ServiceOptions {
    ProviderSpec provider;
    std::optional<std::filesystem::path> persist_dir;
    ProviderFactory provider_factory;  // defaults to make_provider
    std::size_t max_batch_seeds = 64;
};

namespace detail {

inline ApiResponse error_response(int status, std::string code, std::string message,
                                  nlohmann::json details = nlohmann::json::array()) {
    return {status, {{"code", std::move(code)}, {"message", std::move(message)}, {"details", std::move(details)}}};
}

inline nlohmann::json issues_json(const std::vector<Issue>& issues) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& i : issues) out.push_back({{"path", i.path}, {"message", i.message}});
    return out;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw Error("cannot write " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace detail

class Service {
public:
    explicit Service(ServiceOptions options = {}) : options_(std::move(options)) {
        if (!options_.provider_factory) {
            options_.provider_factory = [](const ProviderSpec& spec, ProviderDims dims) { return make_provider(spec, dims); };
        }
        if (options_.persist_dir) {
            std::filesystem::create_directories(*options_.persist_dir);
            restore();
        }
    }

    ApiResponse dispatch(const std::string& method, const std::string& path, const std::string& body) {
        static const std::regex sim_re(R"(^/v1/simulations/([A-Za-z0-9_-]+)(/(rounds|state|report))?/?$)");
        try {
            if (path == "/v1/health") {
                if (method != "GET") return method_not_allowed();
                return {200, {{"status", "ok"}, {"simulations", count()}}};
            }
            if (path == "/v1/simulations" || path == "/v1/simulations/") {
                if (method == "POST") return create(body);
                if (method == "GET") return list();
                return method_not_allowed();
            }
            if (path == "/v1/batches") {
                if (method != "POST") return method_not_allowed();
                return batch(body);
            }
            std::smatch m;
            if (std::regex_match(path, m, sim_re)) {
                auto inst = find(m[1].str());
                if (!inst) return detail::error_response(404, "not_found", "unknown simulation '" + m[1].str() + "'");
                const std::string sub = m[3].str();
                if (sub.empty()) return method == "GET" ? ApiResponse{200, handle_json(*inst)} : method_not_allowed();
                if (sub == "rounds") return method == "POST" ? step(*inst, body) : method_not_allowed();
                if (sub == "state") return method == "GET" ? state(*inst) : method_not_allowed();
                if (sub == "report") return method == "GET" ? report(*inst) : method_not_allowed();
            }
            return detail::error_response(404, "not_found", "no route for " + method + " " + path);
        } catch (const std::exception& e) {
            return detail::error_response(500, "internal", e.what());
        }
    }

    std::size_t count() const {
        std::shared_lock lock(registry_mutex_);
        return instances_.size();
    }

private:
    struct Published {
        Round round = 0;
        nlohmann::json state;
        std::optional<nlohmann::json> report;
    };

    struct Instance {
        std::string id;
        Scenario scenario;
        std::uint64_t seed = 0;
        std::shared_ptr<TextProvider> provider;
        std::atomic<SimStatus> status{SimStatus::created};

        std::mutex permit;  // exclusive execution permit for mutations
        std::optional<Simulation> sim;
        RunResult run;
        std::map<std::string, nlohmann::json> provenance;  // message id -> author/platform/kind/text
        std::vector<nlohmann::json> history;               // successful engagements, all rounds

        mutable std::mutex publish_mutex;  // guards the pointer only
        std::shared_ptr<const Published> published;

        std::shared_ptr<const Published> view() const {
            std::lock_guard lock(publish_mutex);
            return published;
        }
        void publish(std::shared_ptr<const Published> p) {
            std::lock_guard lock(publish_mutex);
            published = std::move(p);
        }
    };

    static ApiResponse method_not_allowed() {
        return detail::error_response(405, "method_not_allowed", "method not allowed on this resource");
    }

    std::shared_ptr<Instance> find(const std::string& id) const {
        std::shared_lock lock(registry_mutex_);
        auto it = instances_.find(id);
        return it == instances_.end() ? nullptr : it->second;
    }

    ApiResponse list() const {
        std::vector<std::shared_ptr<Instance>> all;
        {
            std::shared_lock lock(registry_mutex_);
            for (const auto& [id, inst] : instances_) all.push_back(inst);
        }
        nlohmann::json out = nlohmann::json::array();
        for (const auto& inst : all) out.push_back(handle_json(*inst));
        return {200, {{"simulations", out}}};
    }

    static nlohmann::json handle_json(const Instance& inst) {
        const auto view = inst.view();
        return {{"id", inst.id},
                {"status", to_string(inst.status.load())},
                {"current_round", view ? view->round : 0},
                {"total_rounds", inst.scenario.config.rounds},
                {"scenario", inst.scenario.name},
                {"seed", inst.seed}};
    }

    // Body: a scenario document, {"scenario": doc, "seed"}, {"case": name, "seed"},
    // or {"description": text, "seed"} (text-level template around the description).
    struct Request {
        Scenario scenario;
        std::uint64_t seed = 0;
    };

    static std::variant<Request, ApiResponse> parse_request(const std::string& body, bool allow_seed_list = false) {
        using nlohmann::json;
        json doc;
        try {
            doc = json::parse(body.empty() ? "{}" : body);
        } catch (const json::parse_error& e) {
            auto [line, col] = detail::line_column(body, e.byte > 0 ? e.byte - 1 : 0);
            return detail::error_response(400, "parse_error", e.what(),
                                          json::array({{{"path", ""}, {"line", line}, {"column", col}}}));
        }
        if (!doc.is_object()) return detail::error_response(400, "bad_request", "request body must be a JSON object");
        Request req;
        try {
            if (doc.contains("schema_version")) {
                req.scenario = parse_scenario(body);
                req.seed = req.scenario.config.seed;
                return req;
            }
            if (doc.contains("seed") && !allow_seed_list) {
                if (!doc["seed"].is_number_unsigned()) {
                    return detail::error_response(400, "validation_error", "seed must be a non-negative integer",
                                                  detail::issues_json({{"seed", "expected a non-negative integer"}}));
                }
                req.seed = doc["seed"].get<std::uint64_t>();
            }
            if (doc.contains("scenario")) {
                req.scenario = parse_scenario(doc["scenario"].dump());
                if (!doc.contains("seed")) req.seed = req.scenario.config.seed;
            } else if (doc.contains("case")) {
                if (!doc["case"].is_string()) {
                    return detail::error_response(400, "validation_error", "case must be a string",
                                                  detail::issues_json({{"case", "expected a string"}}));
                }
                auto c = builtin_case(doc["case"].get<std::string>());
                if (!c) {
                    return detail::error_response(400, "validation_error", "unknown case",
                                                  detail::issues_json({{"case", "unknown case '" + doc["case"].get<std::string>() + "'"}}));
                }
                req.scenario = std::move(*c);
                if (!doc.contains("seed")) req.seed = req.scenario.config.seed;
            } else if (doc.contains("description")) {
                if (!doc["description"].is_string() || doc["description"].get<std::string>().empty()) {
                    return detail::error_response(400, "validation_error", "description must be a non-empty string",
                                                  detail::issues_json({{"description", "must be a non-empty string"}}));
                }
                req.scenario = recall_case();
                req.scenario.name = "custom";
                req.scenario.description = doc["description"].get<std::string>();
                req.scenario.topic_text = req.scenario.description;
                for (auto& ev : req.scenario.timeline) ev.text = req.scenario.description + ". " + *ev.text;
            } else {
                return detail::error_response(400, "validation_error", "expected a scenario document, 'scenario', 'case' or 'description'",
                                              detail::issues_json({{"", "no scenario given"}}));
            }
        } catch (const ValidationError& e) {
            return detail::error_response(400, "validation_error", "scenario failed validation", detail::issues_json(e.issues()));
        } catch (const ParseError& e) {
            return detail::error_response(400, "parse_error", e.what(),
                                          json::array({{{"path", ""}, {"line", e.line()}, {"column", e.column()}}}));
        }
        return req;
    }

    ApiResponse create(const std::string& body) {
        auto parsed = parse_request(body);
        if (auto* err = std::get_if<ApiResponse>(&parsed)) return *err;
        Request req = std::move(std::get<Request>(parsed));
        const std::string id = next_id();
        auto inst = std::make_shared<Instance>();
        try {
            init_instance(*inst, id, std::move(req.scenario), req.seed, options_.provider);
        } catch (const ValidationError& e) {
            return detail::error_response(400, "validation_error", "scenario failed validation", detail::issues_json(e.issues()));
        } catch (const ProviderError& e) {
            return detail::error_response(502, "provider_error", e.what());
        } catch (const ConfigError& e) {
            return detail::error_response(400, "validation_error", e.what(), detail::issues_json({{"", e.what()}}));
        }
        if (options_.persist_dir) persist_meta(*inst);
        {
            std::unique_lock lock(registry_mutex_);
            instances_.emplace(id, inst);
        }
        return {201, handle_json(*inst)};
    }

    void init_instance(Instance& inst, std::string id, Scenario scenario, std::uint64_t seed, const ProviderSpec& spec) {
        inst.id = std::move(id);
        inst.scenario = std::move(scenario);
        inst.seed = seed;
        inst.provider = options_.provider_factory(spec, {inst.scenario.config.embedding_dim, inst.scenario.config.emotion_dim});
        inst.sim.emplace(build_simulation(inst.scenario, seed, inst.provider));
        inst.run.snapshots.push_back(inst.sim->world.snapshot());
        for (const auto& ev : inst.scenario.timeline) {
            inst.provenance[ev.id] = {{"author", ev.author}, {"platform", ev.platform}, {"kind", to_string(ev.kind)},
                                      {"text", ev.text ? nlohmann::json(*ev.text) : nlohmann::json(nullptr)}};
        }
        inst.publish(make_view(inst, std::nullopt));
        inst.status = inst.sim->world.completed_rounds() >= inst.scenario.config.rounds ? SimStatus::finished
                                                                                      : SimStatus::awaiting_input;
    }

    // Strategy message for the next round, or a 422 describing what is wrong.
    static std::variant<Injection, ApiResponse> parse_strategy(const Instance& inst, const nlohmann::json& sj) {
        using nlohmann::json;
        std::vector<Issue> issues;
        const World& world = inst.sim->world;
        const SimulationConfig& cfg = world.config();
        Injection inj;
        inj.kind = EventKind::strategy;
        Message& m = inj.message;
        m.id = "strategy-r" + std::to_string(world.next_round());
        m.author = kOrganization;
        m.round = world.next_round();
        m.platform = cfg.platforms.front().platform_id;
        if (!sj.is_object()) return detail::error_response(422, "invalid_strategy", "strategy must be an object");
        if (sj.contains("id")) {
            if (sj["id"].is_string() && !sj["id"].get<std::string>().empty()) m.id = sj["id"].get<std::string>();
            else issues.push_back({"strategy.id", "expected a non-empty string"});
        }
        for (const auto& t : world.tracked()) {
            if (t.message->id == m.id) issues.push_back({"strategy.id", "message id '" + m.id + "' already used"});
        }
        if (sj.contains("platform")) {
            if (sj["platform"].is_string() && cfg.find_platform(sj["platform"].get<std::string>())) {
                m.platform = sj["platform"].get<std::string>();
            } else {
                issues.push_back({"strategy.platform", "unknown platform"});
            }
        }
        const bool has_text = sj.contains("text");
        const bool has_embedding = sj.contains("embedding");
        if (has_text && !(sj["text"].is_string() && !sj["text"].get<std::string>().empty())) {
            issues.push_back({"strategy.text", "expected a non-empty string"});
        }
        auto read_vec = [&](const char* key, std::size_t dim) -> std::optional<Vector> {
            const json& v = sj[key];
            if (!v.is_array() || v.size() != dim) {
                issues.push_back({std::string("strategy.") + key, "expected an array of " + std::to_string(dim) + " numbers"});
                return std::nullopt;
            }
            Vector out;
            for (const auto& x : v) {
                if (!x.is_number() || !std::isfinite(x.get<double>())) {
                    issues.push_back({std::string("strategy.") + key, "entries must be finite numbers"});
                    return std::nullopt;
                }
                out.push_back(x.get<double>());
            }
            return out;
        };
        std::optional<Vector> embedding, emotion;
        if (has_embedding) {
            embedding = read_vec("embedding", cfg.embedding_dim);
            if (embedding && norm2(*embedding) < 1e-12) issues.push_back({"strategy.embedding", "must be non-zero"});
            if (!sj.contains("emotion")) issues.push_back({"strategy.emotion", "required when 'embedding' is given"});
        }
        if (sj.contains("emotion")) {
            emotion = read_vec("emotion", cfg.emotion_dim);
            if (emotion && !all_within(*emotion, -1.0, 1.0)) issues.push_back({"strategy.emotion", "components must lie in [-1,1]"});
        }
        if (!has_text && !has_embedding) issues.push_back({"strategy", "one of 'text' or 'embedding' is required"});
        inj.sender_influence = cfg.organization_influence;
        if (sj.contains("author_influence")) {
            const json& a = sj["author_influence"];
            if (a.is_number() && a.get<double>() >= 0.0 && a.get<double>() <= 1.0) inj.sender_influence = a.get<double>();
            else issues.push_back({"strategy.author_influence", "must be a number in [0,1]"});
        }
        if (sj.contains("targets")) {
            const json& t = sj["targets"];
            if (t.is_string() && t.get<std::string>() == "all") {
                inj.targets = Targets::everyone();
            } else if (t.is_array()) {
                std::vector<std::size_t> idx;
                for (const auto& a : t) {
                    auto i = a.is_string() ? world.agent_index(a.get<std::string>()) : std::nullopt;
                    if (i) idx.push_back(*i);
                    else issues.push_back({"strategy.targets", "unknown agent id " + a.dump()});
                }
                inj.targets = Targets::only(std::move(idx));
            } else {
                issues.push_back({"strategy.targets", "expected \"all\" or an array of agent ids"});
            }
        }
        if (!issues.empty()) {
            return detail::error_response(422, "invalid_strategy", "strategy is malformed", detail::issues_json(issues));
        }
        if (has_text) m.text = sj["text"].get<std::string>();
        // Provider calls may throw ProviderError; the caller maps that to 502.
        m.content_embedding = embedding ? normalized(*embedding) : inst.provider->embed(*m.text);
        m.emotion = emotion ? *emotion : inst.provider->emote(*m.text);
        return inj;
    }

    // Crisis pressure: max R over tracked event messages (plus those scheduled
    // for the coming round), across platforms.
    static double event_pressure(const World& world) {
        double r = 0.0;
        for (const auto& t : world.tracked()) {
            if (t.kind != EventKind::event) continue;
            for (const auto& rec : world.reproduction_of(*t.message)) r = std::max(r, rec.value);
        }
        for (const auto& m : world.scheduled_for(world.next_round())) {
            for (const auto& rec : world.reproduction_of(m)) r = std::max(r, rec.value);
        }
        return r;
    }

    static double event_pressure(const World& world, const RoundTrace& trace) {
        std::set<std::string> events;
        for (const auto& t : world.tracked()) {
            if (t.kind == EventKind::event) events.insert(t.message->id);
        }
        double r = 0.0;
        for (const auto& rec : trace.reproduction) {
            if (events.count(rec.message_id)) r = std::max(r, rec.value);
        }
        return r;
    }

    ApiResponse step(Instance& inst, const std::string& body) {
        std::unique_lock permit(inst.permit, std::try_to_lock);
        if (!permit.owns_lock()) return detail::error_response(409, "conflict", "a round is already in progress");
        if (inst.status == SimStatus::finished) return detail::error_response(409, "conflict", "simulation has finished");
        if (inst.status == SimStatus::failed) return detail::error_response(409, "conflict", "simulation has failed");

        nlohmann::json strategy_json;
        if (!body.empty()) {
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(body);
            } catch (const nlohmann::json::parse_error& e) {
                return detail::error_response(422, "invalid_strategy", std::string("body is not JSON: ") + e.what());
            }
            if (!doc.is_null() && !doc.is_object()) return detail::error_response(422, "invalid_strategy", "body must be an object");
            if (doc.is_object()) {
                if (doc.contains("strategy") && !doc["strategy"].is_null()) strategy_json = doc["strategy"];
                else if (doc.contains("text") || doc.contains("embedding")) strategy_json = doc;
            }
        }
        auto result = execute_round(inst, strategy_json);
        if (result.status == 200 && options_.persist_dir) persist_round(inst, strategy_json);
        return result;
    }

    // Runs under the permit. On any failure the World is restored.
    ApiResponse execute_round(Instance& inst, const nlohmann::json& strategy_json) {
        World& world = inst.sim->world;
        World backup = world;
        inst.status = SimStatus::running_round;
        auto restore = [&] {
            world = std::move(backup);
            inst.status = SimStatus::awaiting_input;
        };
        try {
            std::optional<double> r_before;
            std::optional<std::string> strategy_id;
            if (!strategy_json.is_null()) {
                auto parsed = parse_strategy(inst, strategy_json);
                if (auto* err = std::get_if<ApiResponse>(&parsed)) {
                    restore();
                    return *err;
                }
                Injection inj = std::move(std::get<Injection>(parsed));
                r_before = event_pressure(world);
                strategy_id = inj.message.id;
                const Message& m = inj.message;
                inst.provenance[m.id] = {{"author", m.author}, {"platform", m.platform}, {"kind", "strategy"},
                                         {"text", m.text ? nlohmann::json(*m.text) : nlohmann::json(nullptr)}};
                world.inject_message(std::move(inj));
            }
            RoundTrace trace = world.step_round(world.next_round());
            for (const auto& p : trace.posts) {
                inst.provenance[p.message_id] = {{"author", world.profiles()[p.author].agent_id}, {"platform", p.platform},
                                                 {"kind", "post"}, {"text", p.text}};
            }
            for (const auto& e : trace.engagements) {
                if (e.engaged) inst.history.push_back(history_row(inst, trace.round, e));
            }
            inst.run.traces.push_back(trace);
            inst.run.snapshots.push_back(world.snapshot());

            nlohmann::json out = trace_summary(trace);
            if (strategy_id) {
                const StrategyVerdict v = strategy_acceptance(*r_before, event_pressure(world, trace));
                out["strategy_id"] = *strategy_id;
                out["verdict"] = {{"accepted", v.accepted}, {"delta", v.delta}, {"r_before", v.r_before}, {"r_after", v.r_after}};
            }
            inst.publish(make_view(inst, trace));
            inst.status = world.completed_rounds() >= inst.scenario.config.rounds ? SimStatus::finished
                                                                                  : SimStatus::awaiting_input;
            out["status"] = to_string(inst.status.load());
            return {200, out};
        } catch (const ProviderError& e) {
            restore();
            return detail::error_response(502, "provider_error", e.what());
        } catch (const ConfigError& e) {
            restore();
            return detail::error_response(422, "invalid_strategy", e.what());
        } catch (...) {
            restore();
            throw;
        }
    }

    static nlohmann::json history_row(const Instance& inst, Round round, const EngagementRecord& e) {
        const World& world = inst.sim->world;
        nlohmann::json row{{"round", round},
                           {"agent", world.profiles()[e.agent].agent_id},
                           {"message_id", e.message_id},
                           {"cascade_id", e.cascade_id},
                           {"probability", e.probability},
                           {"post_id", e.post_id ? nlohmann::json(*e.post_id) : nlohmann::json(nullptr)}};
        row["sender"] = e.sender ? nlohmann::json(world.profiles()[*e.sender].agent_id) : nlohmann::json(nullptr);
        auto it = inst.provenance.find(e.message_id);
        row["message"] = it == inst.provenance.end() ? nlohmann::json(nullptr) : it->second;
        return row;
    }

    // Built under the permit from data owned by the instance, then frozen.
    static std::shared_ptr<const Published> make_view(const Instance& inst, const std::optional<RoundTrace>& trace) {
        using nlohmann::json;
        const World& world = inst.sim->world;
        auto view = std::make_shared<Published>();
        view->round = world.completed_rounds();

        const auto& thresholds = inst.scenario.stance_thresholds;
        const auto labels = inst.scenario.ground_truth ? inst.scenario.ground_truth->stance_labels : default_stance_labels();
        json agents = json::array();
        for (std::size_t i = 0; i < world.profiles().size(); ++i) {
            const auto& p = world.profiles()[i];
            const double score = dot(world.states()[i].persona, inst.sim->topic);
            agents.push_back({{"id", p.agent_id},
                              {"platform", p.platform},
                              {"stance", labels[static_cast<std::size_t>(stance_of_score(score, thresholds))]},
                              {"score", score},
                              {"influence", p.influence}});
        }
        json graphs = json::array();
        for (const auto& net : world.networks()) {
            json edges = json::array();
            for (const auto& e : net.edges()) edges.push_back(json::array({e.receiver, e.sender}));
            json engaged = json::array();
            if (trace) {
                for (const auto& e : trace->engagements) {
                    if (!e.engaged || !e.sender) continue;
                    auto it = inst.provenance.find(e.message_id);
                    if (it == inst.provenance.end() || it->second["platform"] != net.platform_id()) continue;
                    engaged.push_back({{"sender", *e.sender}, {"receiver", e.agent}, {"message_id", e.message_id}});
                }
            }
            graphs.push_back({{"platform", net.platform_id()}, {"edges", edges}, {"engaged_edges", engaged}});
        }
        view->state = {{"simulation_id", inst.id},
                       {"round", view->round},
                       {"stance_labels", labels},
                       {"agents", agents},
                       {"graphs", graphs},
                       {"history", inst.history}};
        if (view->round >= 1) {
            const FidelityReport rep = build_report(inst.scenario.name, inst.seed, inst.run, inst.sim->topic, thresholds,
                                                    ground_truth_view(inst.scenario), labels);
            view->report = report_to_json(rep);
        }
        return view;
    }

    static ApiResponse state(const Instance& inst) { return {200, inst.view()->state}; }

    static ApiResponse report(const Instance& inst) {
        const auto view = inst.view();
        if (!view->report) return detail::error_response(409, "conflict", "no completed round yet");
        return {200, *view->report};
    }

    // {"scenario"|"case"|scenario fields..., "seeds": [..]} -> aggregate + per-seed reports.
    ApiResponse batch(const std::string& body) {
        auto parsed = parse_request(body, true);
        if (auto* err = std::get_if<ApiResponse>(&parsed)) return *err;
        Request req = std::move(std::get<Request>(parsed));
        std::vector<std::uint64_t> seeds;
        const auto doc = nlohmann::json::parse(body);
        if (doc.contains("seeds")) {
            const auto& s = doc["seeds"];
            bool ok = s.is_array() && !s.empty() && s.size() <= options_.max_batch_seeds;
            if (ok) {
                for (const auto& x : s) {
                    if (!x.is_number_unsigned()) ok = false;
                    else seeds.push_back(x.get<std::uint64_t>());
                }
            }
            if (!ok) {
                return detail::error_response(400, "validation_error", "seeds must be a non-empty array of non-negative integers",
                                              detail::issues_json({{"seeds", "expected 1.." + std::to_string(options_.max_batch_seeds) + " integers"}}));
            }
        } else {
            seeds = {req.seed};
        }
        std::vector<FidelityReport> reports;
        nlohmann::json per_seed = nlohmann::json::array();
        try {
            for (auto seed : seeds) {
                auto provider = options_.provider_factory(options_.provider, {req.scenario.config.embedding_dim, req.scenario.config.emotion_dim});
                reports.push_back(run_scenario(req.scenario, seed, provider).report);
                per_seed.push_back(report_to_json(reports.back()));
            }
        } catch (const ProviderError& e) {
            return detail::error_response(502, "provider_error", e.what());
        } catch (const ConfigError& e) {
            return detail::error_response(400, "validation_error", e.what(), detail::issues_json({{"", e.what()}}));
        }
        return {200, {{"aggregate", report_to_json(aggregate_seeds(reports))}, {"per_seed", per_seed}}};
    }

    std::string next_id() { return "sim-" + std::to_string(++counter_); }

    // ---- persistence: <dir>/<id>/meta.json + round-NNNNNN.json

    static std::string round_file(Round r) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "round-%06llu.json", static_cast<unsigned long long>(r));
        return buf;
    }

    void persist_meta(const Instance& inst) const {
        const auto dir = *options_.persist_dir / inst.id;
        std::filesystem::create_directories(dir);
        nlohmann::json meta{{"id", inst.id}, {"seed", inst.seed}, {"scenario", scenario_to_json(inst.scenario)}};
        detail::write_file_atomic(dir / "meta.json", meta.dump(2));
    }

    void persist_round(const Instance& inst, const nlohmann::json& strategy) const {
        const RoundTrace& t = inst.run.traces.back();
        nlohmann::json rec{{"round", t.round}, {"strategy", strategy}, {"trace", trace_to_json(t)}};
        detail::write_file_atomic(*options_.persist_dir / inst.id / round_file(t.round), rec.dump());
    }

    // Rebuild every persisted simulation and replay its rounds; a replay whose
    // trace differs from the stored one marks the instance failed.
    void restore() {
        std::vector<std::filesystem::path> dirs;
        for (const auto& entry : std::filesystem::directory_iterator(*options_.persist_dir)) {
            if (entry.is_directory() && std::filesystem::exists(entry.path() / "meta.json")) dirs.push_back(entry.path());
        }
        std::sort(dirs.begin(), dirs.end());
        for (const auto& dir : dirs) {
            auto inst = std::make_shared<Instance>();
            const auto meta = nlohmann::json::parse(detail::read_file(dir / "meta.json"));
            const std::string id = meta.at("id").get<std::string>();
            if (id.rfind("sim-", 0) == 0) {
                try {
                    counter_ = std::max<std::uint64_t>(counter_, std::stoull(id.substr(4)));
                } catch (const std::exception&) {
                }
            }
            init_instance(*inst, id, parse_scenario(meta.at("scenario").dump()), meta.at("seed").get<std::uint64_t>(),
                          options_.provider);
            for (Round r = 1;; ++r) {
                const auto file = dir / round_file(r);
                if (!std::filesystem::exists(file)) break;
                const auto rec = nlohmann::json::parse(detail::read_file(file));
                const auto res = execute_round(*inst, rec.at("strategy"));
                if (res.status != 200 || trace_to_json(inst->run.traces.back()) != rec.at("trace")) {
                    inst->status = SimStatus::failed;
                    break;
                }
            }
            std::unique_lock lock(registry_mutex_);
            instances_.emplace(id, inst);
        }
    }

    ServiceOptions options_;
    mutable std::shared_mutex registry_mutex_;
    std::map<std::string, std::shared_ptr<Instance>> instances_;
    std::atomic<std::uint64_t> counter_{0};
};

// Binds `service` to an httplib server. Returns false if the address cannot be bound.
class HttpFrontend {
public:
    explicit HttpFrontend(Service& service) : service_(service) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            const ApiResponse r = service_.dispatch(req.method, req.path, req.body);
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        server_.Get(".*", handler);
        server_.Post(".*", handler);
        server_.Put(".*", handler);
        server_.Delete(".*", handler);
        // httplib's default adds SO_REUSEPORT, which lets a second server share a busy port.
        server_.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
    }

    // Bind (port 0 picks a free port) without serving yet.
    int bind(const std::string& host, int port) {
        if (port == 0) return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }

    bool listen_after_bind() { return server_.listen_after_bind(); }
    void stop() { server_.stop(); }
    bool is_running() const { return server_.is_running(); }
    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    Service& service_;
    httplib::Server server_;
};

}  // namespace opcascade
