#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "netswap/genio.hpp"
#include "netswap/mechanisms.hpp"
#include "netswap/verify.hpp"

namespace netswap::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kCtcUnforcedLimit = 14;

struct Source {
    std::string instance_path;
    std::string fixture;
};

struct Options {
    std::string mechanism;
    Source source;
    std::optional<std::uint64_t> seed;
    bool trace = false;
    bool pretty = false;
    bool force = false;

    std::string properties = "ir,ic,po,stability,stable-cc,optimal-cc,stable-wcc,optimal-wcc";
    int max_n = VerifyCaps{}.max_n;
    int max_ic_n = VerifyCaps{}.max_ic_n;
    int max_ir_enumeration_n = VerifyCaps{}.max_ir_enumeration_n;
    bool no_neighbor_enumeration = false;
    bool prefix_misreports = false;

    std::string property;
    int n = 4;
    bool exhaustive = false;
    std::uint64_t samples = 0;
    double edge_probability = 0.5;
    bool stop_at_first = false;

    std::string fixture_name;
    std::string out_dir;

    int repeats = 3;
};

[[noreturn]] void input_error(const std::string& message) { throw Error(ErrorCode::InvalidArgument, message); }

MechanismKind mechanism_of(const Options& o) {
    if (auto kind = parse_mechanism(o.mechanism)) {
        return *kind;
    }
    input_error("unknown mechanism '" + o.mechanism + "' (expected ttc, swn, ls or ctc)");
}

Instance load(const Source& source) {
    if (!source.fixture.empty()) {
        return paper_fixture(source.fixture).instance;
    }
    if (source.instance_path.empty()) {
        input_error("one of --instance or --fixture is required");
    }
    return load_instance_file(source.instance_path);
}

std::optional<std::uint64_t> seed_of(const Options& o) {
    if (o.seed) {
        return o.seed;
    }
    if (const char* env = std::getenv("NETSWAP_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto value = std::stoull(env, &used);
            if (used == std::string(env).size()) {
                return value;
            }
        } catch (const std::exception&) {
        }
        input_error(std::string("NETSWAP_SEED is not an unsigned integer: ") + env);
    }
    return std::nullopt;
}

TieRule tie_rule_of(const Options& o) {
    const auto seed = seed_of(o);
    return seed ? TieRule::shuffled(*seed) : TieRule::by_id();
}

void guard_ctc(MechanismKind kind, int n, bool force) {
    if (kind == MechanismKind::CTC && n > kCtcUnforcedLimit && !force) {
        input_error("ctc on " + std::to_string(n) + " agents needs --force (limit " +
                    std::to_string(kCtcUnforcedLimit) + " without it)");
    }
}

ordered_json allocation_json(const Allocation& allocation) {
    ordered_json j = ordered_json::object();
    for (AgentId i = 1; i <= allocation.size(); ++i) {
        j[std::to_string(i)] = allocation.house_of(i);
    }
    return j;
}

std::string dump(const ordered_json& j, bool pretty) { return j.dump(pretty ? 2 : -1); }

VerifyCaps caps_of(const Options& o) {
    VerifyCaps caps;
    caps.max_n = o.max_n;
    caps.max_ic_n = o.max_ic_n;
    caps.max_ir_enumeration_n = o.max_ir_enumeration_n;
    caps.enumerate_neighbors = !o.no_neighbor_enumeration;
    caps.prefix_misreports = o.prefix_misreports;
    return caps;
}

int cmd_run(const Options& o, std::ostream& out) {
    const MechanismKind kind = mechanism_of(o);
    const Instance instance = load(o.source);
    guard_ctc(kind, instance.size(), o.force);
    Trace trace;
    const Allocation allocation = run_mechanism(kind, instance, tie_rule_of(o), o.trace ? &trace : nullptr);
    if (o.pretty) {
        out << mechanism_name(kind) << " allocation " << allocation.to_string() << "\n";
        for (const auto& event : trace) {
            out << "  " << trace_event_to_json(event) << "\n";
        }
        return Ok;
    }
    out << trace_to_jsonl(trace);
    out << dump(ordered_json{{"allocation", allocation_json(allocation)}}, false) << "\n";
    return Ok;
}

std::vector<Property> parse_properties(const std::string& csv) {
    std::vector<Property> out;
    std::stringstream stream(csv);
    std::string item;
    while (std::getline(stream, item, ',')) {
        if (item.empty()) {
            continue;
        }
        const auto p = parse_property(item);
        if (!p) {
            input_error("unknown property '" + item + "'");
        }
        out.push_back(*p);
    }
    if (out.empty()) {
        input_error("--properties lists no property");
    }
    return out;
}

int cmd_verify(const Options& o, std::ostream& out) {
    const MechanismKind kind = mechanism_of(o);
    const Instance instance = load(o.source);
    guard_ctc(kind, instance.size(), o.force);
    const auto properties = parse_properties(o.properties);
    const VerifyCaps caps = caps_of(o);
    const Mechanism mechanism = make_mechanism(kind, tie_rule_of(o));
    const Allocation allocation = mechanism(instance.truthful());

    ordered_json reports = ordered_json::array();
    bool violated = false;
    for (Property p : properties) {
        const PropertyReport report = check_property(p, mechanism, instance, caps);
        violated = violated || !report.holds;
        reports.push_back(ordered_json::parse(report_to_json(report)));
    }
    ordered_json j;
    j["mechanism"] = mechanism_name(kind);
    j["allocation"] = allocation_json(allocation);
    j["reports"] = std::move(reports);
    out << dump(j, o.pretty) << "\n";
    return violated ? Violation : Ok;
}

int cmd_scan(const Options& o, std::ostream& out) {
    ScanOptions scan;
    scan.mechanism = mechanism_of(o);
    const auto property = parse_property(o.property);
    if (!property) {
        input_error("unknown property '" + o.property + "'");
    }
    scan.property = *property;
    scan.n = o.n;
    scan.exhaustive = o.exhaustive;
    scan.samples = o.samples;
    scan.seed = seed_of(o).value_or(0);
    scan.edge_probability = o.edge_probability;
    scan.stop_at_first = o.stop_at_first;
    if (!o.exhaustive && o.samples == 0) {
        input_error("scan needs --exhaustive or --samples");
    }
    if (!o.exhaustive) {
        guard_ctc(scan.mechanism, o.n, o.force);
    }
    const ScanReport report = exhaustive_scan(scan);
    out << dump(ordered_json::parse(scan_report_to_json(report)), o.pretty) << "\n";
    return Ok;
}

int cmd_fixtures(const Options& o, std::ostream& out) {
    if (!o.out_dir.empty()) {
        std::filesystem::create_directories(o.out_dir);
        ordered_json written = ordered_json::array();
        for (const auto& name : fixture_names()) {
            const auto path = std::filesystem::path(o.out_dir) / (name + ".json");
            std::ofstream file(path);
            file << serialize_instance(paper_fixture(name).instance, true) << "\n";
            if (!file) {
                input_error("cannot write " + path.string());
            }
            written.push_back(path.string());
        }
        out << dump(ordered_json{{"written", written}}, o.pretty) << "\n";
        return Ok;
    }
    if (!o.fixture_name.empty()) {
        out << serialize_instance(paper_fixture(o.fixture_name).instance, o.pretty) << "\n";
        return Ok;
    }
    ordered_json list = ordered_json::array();
    for (const auto& name : fixture_names()) {
        const Fixture& f = paper_fixture(name);
        ordered_json expected = ordered_json::array();
        for (const auto& e : f.expected) {
            expected.push_back({{"label", e.label}, {"allocation", e.allocation.to_string()}});
        }
        list.push_back({{"name", f.name}, {"n", f.instance.size()}, {"description", f.description},
                        {"expected", std::move(expected)}});
    }
    out << dump(list, o.pretty) << "\n";
    return Ok;
}

int cmd_bench(const Options& o, std::ostream& out) {
    const MechanismKind kind = mechanism_of(o);
    guard_ctc(kind, o.n, o.force);
    if (o.n < 2) {
        input_error("bench needs --n of at least 2");
    }
    const std::uint64_t seed = seed_of(o).value_or(0);
    std::vector<int> sizes;
    for (int divisor : {8, 4, 2, 1}) {
        const int size = std::max(2, o.n / divisor);
        if (sizes.empty() || sizes.back() != size) {
            sizes.push_back(size);
        }
    }
    ordered_json rows = ordered_json::array();
    std::vector<double> xs;
    std::vector<double> ys;
    for (int size : sizes) {
        double best = 0.0;
        for (int r = 0; r < std::max(1, o.repeats); ++r) {
            const Instance instance = gen_random(size, o.edge_probability, seed + static_cast<std::uint64_t>(r));
            const auto start = std::chrono::steady_clock::now();
            run_mechanism(kind, instance, TieRule::by_id());
            const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            best = r == 0 ? seconds : std::min(best, seconds);
        }
        rows.push_back({{"n", size}, {"seconds", best}});
        xs.push_back(std::log(static_cast<double>(size)));
        ys.push_back(std::log(std::max(best, 1e-9)));
    }
    // Least-squares slope of log(time) against log(n).
    double slope = 0.0;
    if (xs.size() > 1) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxy += (xs[k] - mx) * (ys[k] - my);
            sxx += (xs[k] - mx) * (xs[k] - mx);
        }
        slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    ordered_json j;
    j["mechanism"] = mechanism_name(kind);
    j["n"] = o.n;
    j["seed"] = seed;
    j["edge_probability"] = o.edge_probability;
    j["runs"] = std::move(rows);
    j["log_log_slope"] = slope;
    out << dump(j, o.pretty) << "\n";
    return Ok;
}

void add_source(CLI::App* app, Options& o) {
    auto* instance = app->add_option("--instance", o.source.instance_path, "instance JSON file");
    auto* fixture = app->add_option("--fixture", o.source.fixture, "built-in fixture name");
    instance->excludes(fixture);
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Housing-market mechanisms on social networks", "netswap"};
    app.require_subcommand(1);
    app.add_flag("--pretty", o.pretty, "human-readable output");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "seed for tie breaking or sampling (fallback: NETSWAP_SEED)");
        sub->add_flag("--pretty", o.pretty, "human-readable output");
        sub->add_flag("--force", o.force, "allow ctc beyond 14 agents");
    };

    auto* run_cmd = app.add_subcommand("run", "run a mechanism and print the allocation");
    run_cmd->add_option("--mechanism", o.mechanism, "ttc, swn, ls or ctc")->required();
    add_source(run_cmd, o);
    run_cmd->add_flag("--trace", o.trace, "emit one JSON event per line before the allocation");
    add_common(run_cmd);

    auto* verify_cmd = app.add_subcommand("verify", "check properties of a mechanism on one instance");
    verify_cmd->add_option("--mechanism", o.mechanism, "ttc, swn, ls or ctc")->required();
    add_source(verify_cmd, o);
    verify_cmd->add_option("--properties", o.properties, "comma-separated property names");
    verify_cmd->add_option("--max-n", o.max_n, "cap for allocation checks");
    verify_cmd->add_option("--max-ic-n", o.max_ic_n, "cap for incentive compatibility checks");
    verify_cmd->add_option("--max-ir-enumeration-n", o.max_ir_enumeration_n,
                           "largest market whose other reports IR enumerates");
    verify_cmd->add_flag("--no-neighbor-enumeration", o.no_neighbor_enumeration,
                         "only consider truthful neighbor sets");
    verify_cmd->add_flag("--prefix-misreports", o.prefix_misreports,
                         "only enumerate rankings that differ above the agent's own house");
    add_common(verify_cmd);

    auto* scan_cmd = app.add_subcommand("scan", "check a property over many instances");
    scan_cmd->add_option("--mechanism", o.mechanism, "ttc, swn, ls or ctc")->required();
    scan_cmd->add_option("--property", o.property, "property name")->required();
    scan_cmd->add_option("--n", o.n, "agents (exhaustive: up to this many)");
    auto* exhaustive = scan_cmd->add_flag("--exhaustive", o.exhaustive, "all markets up to isomorphism");
    auto* samples = scan_cmd->add_option("--samples", o.samples, "number of random markets");
    exhaustive->excludes(samples);
    scan_cmd->add_option("--edge-probability", o.edge_probability, "edge probability for random markets");
    scan_cmd->add_flag("--stop-at-first", o.stop_at_first, "stop after the first violation");
    add_common(scan_cmd);

    auto* fixtures_cmd = app.add_subcommand("fixtures", "list or export the built-in fixtures");
    fixtures_cmd->add_option("--name", o.fixture_name, "print one fixture as an instance document");
    fixtures_cmd->add_option("--out", o.out_dir, "write every fixture to this directory");
    fixtures_cmd->add_flag("--pretty", o.pretty, "human-readable output");

    auto* bench_cmd = app.add_subcommand("bench", "time a mechanism on random markets of growing size");
    bench_cmd->add_option("--mechanism", o.mechanism, "ttc, swn, ls or ctc")->required();
    bench_cmd->add_option("--n", o.n, "largest market size")->required();
    bench_cmd->add_option("--repeats", o.repeats, "runs per size; the fastest is reported");
    bench_cmd->add_option("--edge-probability", o.edge_probability, "edge probability");
    add_common(bench_cmd);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return InputError;
    }

    try {
        if (*run_cmd) {
            return cmd_run(o, out);
        }
        if (*verify_cmd) {
            return cmd_verify(o, out);
        }
        if (*scan_cmd) {
            return cmd_scan(o, out);
        }
        if (*fixtures_cmd) {
            return cmd_fixtures(o, out);
        }
        return cmd_bench(o, out);
    } catch (const Error& e) {
        err << "netswap: " << e.what() << "\n";
        return e.code() == ErrorCode::CapExceeded ? CapExceeded : InputError;
    } catch (const std::exception& e) {
        err << "netswap: " << e.what() << "\n";
        return InputError;
    }
}

} // namespace netswap::cli
