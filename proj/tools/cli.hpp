#pragma once

// The opcascade command line. Kept in a header so the test suite can drive
// cli_main() without spawning processes.
//
// Exit codes: 0 success, 1 check failure, 2 usage or validation error.
// Precedence for every option with an OPCASCADE_* variable: flag > env > default.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "opcascade/cases.hpp"
#include "opcascade/service.hpp"
#include "opcascade/simulation.hpp"
#include "opcascade/trace_io.hpp"
#include "opcascade/verify/acceptance.hpp"

namespace opcascade::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

// Set by the signal handler in main(); serve polls it.
inline std::atomic<bool>& stop_requested() {
    static std::atomic<bool> flag{false};
    return flag;
}

namespace detail {

// "1,2,5" or "1-5" or a mix ("1-3,9").
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string part;
    auto number = [&](const std::string& s) {
        if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError("--seeds: '" + s + "' is not a non-negative integer");
        }
        return std::stoull(s);
    };
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash == std::string::npos) {
            out.push_back(number(part));
            continue;
        }
        const auto lo = number(part.substr(0, dash)), hi = number(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("--seeds: empty range '" + part + "'");
        if (hi - lo >= 10000) throw ConfigError("--seeds: range '" + part + "' is too large");
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
    }
    if (out.empty()) throw ConfigError("--seeds: no seeds given");
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end()) throw ConfigError("--seeds: duplicate seed");
    return out;
}

inline Scenario resolve_scenario(const std::string& path, const std::string& case_name) {
    if (!path.empty() && !case_name.empty()) throw ConfigError("give either --scenario or --case, not both");
    if (!case_name.empty()) {
        auto s = builtin_case(case_name);
        if (!s) {
            std::string names;
            for (const auto& n : builtin_case_names()) names += " " + n;
            throw ConfigError("unknown case '" + case_name + "'; available:" + names);
        }
        return *s;
    }
    if (path.empty()) throw ConfigError("a scenario is required (--scenario PATH or --case NAME)");
    return load_scenario(path);
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

inline ProviderSpec provider_spec(const std::string& text, const std::string& cache) {
    ProviderSpec spec = ProviderSpec::parse(text);
    if (!cache.empty()) spec.cache_path = cache;
    spec.validate();
    return spec;
}

// host:port, :port or host (port 8080).
inline std::pair<std::string, int> parse_bind(const std::string& text) {
    const auto colon = text.rfind(':');
    std::string host = colon == std::string::npos ? text : text.substr(0, colon);
    if (host.empty()) host = "127.0.0.1";
    int port = 8080;
    if (colon != std::string::npos) {
        const std::string p = text.substr(colon + 1);
        if (p.empty() || p.find_first_not_of("0123456789") != std::string::npos || p.size() > 5 || std::stoi(p) > 65535) {
            throw ConfigError("--bind: bad port in '" + text + "'");
        }
        port = std::stoi(p);
    }
    return {host, port};
}

}  // namespace detail

struct RunArgs {
    std::string scenario, case_name, seeds = "1", out = "out", provider = "local", provider_cache;
    unsigned jobs = 0;
};

// One trace file, report and CSV pair per seed, then the aggregate.
inline int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
    const Scenario s = detail::resolve_scenario(a.scenario, a.case_name);
    if (auto issues = validate_scenario(s); !issues.empty()) throw ValidationError(std::move(issues));
    const auto seeds = detail::parse_seeds(a.seeds);
    const ProviderSpec spec = detail::provider_spec(a.provider, a.provider_cache);
    const ProviderDims dims{s.config.embedding_dim, s.config.emotion_dim};
    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir);

    // Seeds are independent; each worker owns its provider and output paths.
    std::vector<FidelityReport> reports(seeds.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(seeds.size());
    auto worker = [&] {
        for (std::size_t k; (k = next++) < seeds.size();) {
            try {
                const std::uint64_t seed = seeds[k];
                auto run = run_scenario(s, seed, make_provider(spec, dims));
                std::string traces;
                for (const auto& t : run.run.traces) traces += trace_to_json(t).dump() + "\n";
                const std::string tag = "seed" + std::to_string(seed);
                detail::write_text(dir / ("trace-" + tag + ".jsonl"), traces);
                detail::write_text(dir / ("report-" + tag + ".json"), report_to_json(run.report).dump(2) + "\n");
                std::ostringstream traj, dist;
                write_trajectory_csv(traj, run.report);
                write_distribution_csv(dist, run.report);
                detail::write_text(dir / ("trajectory-" + tag + ".csv"), traj.str());
                detail::write_text(dir / ("distribution-" + tag + ".csv"), dist.str());
                reports[k] = std::move(run.report);
            } catch (const std::exception& e) {
                errors[k] = e.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned jobs = std::min<unsigned>(a.jobs ? a.jobs : hw, static_cast<unsigned>(seeds.size()));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        if (!errors[k].empty()) {
            err << "seed " << seeds[k] << ": " << errors[k] << "\n";
            return kCheckFailed;
        }
    }

    const FidelityReport agg = aggregate_seeds(reports);
    detail::write_text(dir / "aggregate.json", report_to_json(agg).dump(2) + "\n");
    std::ostringstream traj, dist;
    write_trajectory_csv(traj, agg);
    write_distribution_csv(dist, agg);
    detail::write_text(dir / "trajectory-aggregate.csv", traj.str());
    detail::write_text(dir / "distribution-aggregate.csv", dist.str());

    out << s.name << ": " << seeds.size() << " seed(s) -> " << dir.string() << "\n";
    if (agg.has_ground_truth) {
        out << "  mean r   = " << (agg.pearson_r ? std::to_string(*agg.pearson_r) : "undefined") << "\n";
        out << "  mean JSD = " << (agg.jsd ? std::to_string(*agg.jsd) : "undefined") << "\n";
    }
    return kOk;
}

struct VerifyArgs {
    std::string filter;
    double spectral_tol = 1e-6;
    std::size_t ic_runs = 100000;
};

inline int cmd_verify(const VerifyArgs& a, std::ostream& out) {
    verify::AcceptanceOptions o;
    o.filter = a.filter;
    o.spectral_tol = a.spectral_tol;
    o.ic_runs = a.ic_runs;
    std::size_t failed = 0;
    const auto results = verify::run_acceptance(o, [&](const verify::CheckResult& r) {
        out << verify::format_result(r) << std::endl;
        failed += !r.passed;
    });
    if (results.empty()) {
        out << "no check matches filter '" << a.filter << "'\n";
        return kUsage;
    }
    out << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed ? kCheckFailed : kOk;
}

struct ServeArgs {
    std::string bind = "127.0.0.1:8080", provider = "local", provider_cache, persist;
};

// Blocks until stop_requested() (SIGINT/SIGTERM in main) or the server dies.
// `on_ready` receives the bound port; tests use it with port 0.
inline int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err,
                     const std::function<void(int)>& on_ready = {}) {
    const auto [host, port] = detail::parse_bind(a.bind);
    ServiceOptions so;
    so.provider = detail::provider_spec(a.provider, a.provider_cache);
    if (!a.persist.empty()) so.persist_dir = a.persist;
    Service service(so);
    HttpFrontend http(service);
    const int bound = http.bind(host, port);
    if (bound <= 0) {
        err << "cannot bind " << host << ":" << port << " (address in use or not permitted)\n";
        return kUsage;
    }
    std::thread server([&http] { http.listen_after_bind(); });
    http.wait_until_ready();
    out << "listening on http://" << host << ":" << bound << "/v1" << std::endl;
    if (on_ready) on_ready(bound);
    while (!stop_requested().load() && http.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    http.stop();
    server.join();
    out << "stopped" << std::endl;
    return kOk;
}

struct GtImportArgs {
    std::string scenario, case_name, csv, out;
};

// Attaches a round,value CSV to a scenario as its ground-truth trajectory.
inline int cmd_gt_import(const GtImportArgs& a, std::ostream& out) {
    Scenario s = detail::resolve_scenario(a.scenario, a.case_name);
    std::ifstream in(a.csv);
    if (!in) throw ConfigError("cannot read " + a.csv);
    GroundTruth gt = s.ground_truth.value_or(GroundTruth{});
    gt.trajectory = import_trajectory_csv(in);
    s.ground_truth = gt;
    if (auto issues = validate_scenario(s); !issues.empty()) throw ValidationError(std::move(issues));
    save_scenario(s, a.out);
    out << "wrote " << a.out << " (" << gt.trajectory.size() << " ground-truth points)\n";
    return kOk;
}

struct EdgesArgs {
    std::string scenario, case_name, platform, out;
    std::uint64_t seed = 1;
};

// Edge list (receiver sender) of one platform as the world would build it.
inline int cmd_edges(const EdgesArgs& a, std::ostream& out) {
    const Scenario s = detail::resolve_scenario(a.scenario, a.case_name);
    const NetworkSpec* spec = nullptr;
    for (const auto& n : s.networks) {
        if (a.platform.empty() || n.platform == a.platform) {
            spec = &n;
            break;
        }
    }
    if (!spec) throw ConfigError("no network for platform '" + a.platform + "'");
    const std::size_t n = s.config.num_agents;
    const PlatformNetwork net = spec->edges ? PlatformNetwork(spec->platform, n, *spec->edges)
                                            : generate_network(spec->platform, *spec->generator, n, a.seed);
    if (a.out.empty()) {
        write_edge_list(out, net);
    } else {
        std::ofstream f(a.out);
        if (!f) throw ConfigError("cannot write " + a.out);
        write_edge_list(f, net);
    }
    return kOk;
}

struct ExportArgs {
    std::string case_name, out;
    bool externalize = false;
};

inline int cmd_export_case(const ExportArgs& a, std::ostream& out) {
    const Scenario s = detail::resolve_scenario("", a.case_name);
    save_scenario(s, a.out, a.externalize);
    out << "wrote " << a.out << "\n";
    return kOk;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                    const std::function<void(int)>& on_serve_ready = {}) {
    CLI::App app{"opcascade: agent-based opinion cascade simulator"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run a scenario for one or more seeds");
    run_cmd->add_option("--scenario", run.scenario, "scenario JSON path")->envname("OPCASCADE_SCENARIO");
    run_cmd->add_option("--case", run.case_name, "bundled case (flagship, recall, minimal)");
    run_cmd->add_option("--seeds", run.seeds, "seeds, e.g. 1,2,3 or 1-5")->envname("OPCASCADE_SEEDS")->capture_default_str();
    run_cmd->add_option("--out", run.out, "output directory")->envname("OPCASCADE_OUT")->capture_default_str();
    run_cmd->add_option("--provider", run.provider, "local, local:SEED or an http URL")
        ->envname("OPCASCADE_PROVIDER")
        ->capture_default_str();
    run_cmd->add_option("--provider-cache", run.provider_cache, "JSONL cache for the http provider")
        ->envname("OPCASCADE_PROVIDER_CACHE");
    run_cmd->add_option("--jobs", run.jobs, "parallel seeds (0 = hardware threads)")->envname("OPCASCADE_JOBS");

    VerifyArgs ver;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance checks");
    verify_cmd->add_option("--filter", ver.filter, "comma-separated check ids (ic, spectral, phase, state, dual, metrics, determinism, service)")->envname("OPCASCADE_FILTER");
    verify_cmd->add_option("--spectral-tol", ver.spectral_tol, "spectral oracle tolerance")
        ->envname("OPCASCADE_SPECTRAL_TOL")
        ->capture_default_str();
    verify_cmd->add_option("--ic-runs", ver.ic_runs, "engine runs per IC graph")
        ->envname("OPCASCADE_IC_RUNS")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    ServeArgs srv;
    auto* serve_cmd = app.add_subcommand("serve", "start the HTTP service");
    serve_cmd->add_option("--bind", srv.bind, "host:port")->envname("OPCASCADE_BIND")->capture_default_str();
    serve_cmd->add_option("--provider", srv.provider, "local, local:SEED or an http URL")
        ->envname("OPCASCADE_PROVIDER")
        ->capture_default_str();
    serve_cmd->add_option("--provider-cache", srv.provider_cache, "JSONL cache for the http provider")
        ->envname("OPCASCADE_PROVIDER_CACHE");
    serve_cmd->add_option("--persist", srv.persist, "directory for per-round write-through")
        ->envname("OPCASCADE_PERSIST");

    GtImportArgs gti;
    auto* gt_cmd = app.add_subcommand("gt-import", "attach a round,value CSV as ground truth");
    gt_cmd->add_option("--scenario", gti.scenario, "scenario JSON path")->envname("OPCASCADE_SCENARIO");
    gt_cmd->add_option("--case", gti.case_name, "bundled case");
    gt_cmd->add_option("--csv", gti.csv, "CSV with header round,value")->required();
    gt_cmd->add_option("--out", gti.out, "output scenario path")->required();

    EdgesArgs edg;
    auto* edges_cmd = app.add_subcommand("edges", "print a platform's edge list");
    edges_cmd->add_option("--scenario", edg.scenario, "scenario JSON path")->envname("OPCASCADE_SCENARIO");
    edges_cmd->add_option("--case", edg.case_name, "bundled case");
    edges_cmd->add_option("--platform", edg.platform, "platform id (default: first)");
    edges_cmd->add_option("--seed", edg.seed, "generator seed")->capture_default_str();
    edges_cmd->add_option("--out", edg.out, "file (default: stdout)");

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export-case", "write a bundled case as scenario JSON");
    export_cmd->add_option("--case", exp.case_name, "bundled case")->required();
    export_cmd->add_option("--out", exp.out, "output path")->required();
    export_cmd->add_flag("--externalize", exp.externalize, "store long vectors in a .vec sidecar");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*run_cmd) return cmd_run(run, out, err);
        if (*verify_cmd) return cmd_verify(ver, out);
        if (*serve_cmd) return cmd_serve(srv, out, err, on_serve_ready);
        if (*gt_cmd) return cmd_gt_import(gti, out);
        if (*edges_cmd) return cmd_edges(edg, out);
        if (*export_cmd) return cmd_export_case(exp, out);
    } catch (const ValidationError& e) {
        err << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        err << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsage;
}

}  // namespace opcascade::cli
