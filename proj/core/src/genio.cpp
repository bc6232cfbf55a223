#include "netswap/genio.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

namespace netswap {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedJson, what); }

const json& require(const json& object, const char* key) {
    auto it = object.find(key);
    if (it == object.end()) {
        malformed(std::string("missing key '") + key + "'");
    }
    return *it;
}

std::vector<AgentId> int_array(const json& value, const std::string& where) {
    if (!value.is_array()) {
        malformed(where + " must be an array");
    }
    std::vector<AgentId> out;
    out.reserve(value.size());
    for (const auto& v : value) {
        if (!v.is_number_integer()) {
            malformed(where + " must contain integers");
        }
        out.push_back(v.get<AgentId>());
    }
    return out;
}

std::vector<RawAgentType> read_profiles(const json& value, int n, const std::string& where) {
    if (!value.is_object()) {
        malformed(where + " must be an object keyed by agent id");
    }
    std::vector<RawAgentType> profiles(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (const auto& [key, entry] : value.items()) {
        int id = 0;
        std::size_t used = 0;
        try {
            id = std::stoi(key, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != key.size() || id < 1 || id > n) {
            malformed(where + " has invalid agent key '" + key + "'");
        }
        if (!entry.is_object()) {
            malformed(where + "." + key + " must be an object");
        }
        auto& profile = profiles[static_cast<std::size_t>(id - 1)];
        profile.pref = int_array(require(entry, "pref"), where + "." + key + ".pref");
        profile.neighbors = int_array(require(entry, "neighbors"), where + "." + key + ".neighbors");
        seen[static_cast<std::size_t>(id - 1)] = 1;
    }
    for (int i = 1; i <= n; ++i) {
        if (!seen[static_cast<std::size_t>(i - 1)]) {
            malformed(where + " is missing agent " + std::to_string(i));
        }
    }
    return profiles;
}

json parse_strict(std::string_view text) {
    // Key sets of the objects currently open; a repeated key marks the document as invalid.
    std::vector<std::set<std::string>> open;
    std::string duplicate;
    json::parser_callback_t callback = [&](int, json::parse_event_t event, json& parsed) {
        switch (event) {
        case json::parse_event_t::object_start: open.emplace_back(); break;
        case json::parse_event_t::object_end:
            if (!open.empty()) {
                open.pop_back();
            }
            break;
        case json::parse_event_t::key:
            if (!open.empty() && !open.back().insert(parsed.get<std::string>()).second && duplicate.empty()) {
                duplicate = parsed.get<std::string>();
            }
            break;
        default: break;
        }
        return true;
    };
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), callback);
    } catch (const json::exception& e) {
        malformed(e.what());
    }
    if (!duplicate.empty()) {
        malformed("duplicate key '" + duplicate + "'");
    }
    return doc;
}

ordered_json profiles_json(const std::vector<AgentType>& profile) {
    ordered_json out = ordered_json::object();
    for (std::size_t k = 0; k < profile.size(); ++k) {
        ordered_json entry;
        entry["pref"] = profile[k].preference.ranking();
        entry["neighbors"] = profile[k].neighbors;
        out[std::to_string(k + 1)] = std::move(entry);
    }
    return out;
}

} // namespace

RawInstance parse_raw_instance(std::string_view text) {
    const json doc = parse_strict(text);
    if (!doc.is_object()) {
        malformed("instance document must be an object");
    }
    RawInstance raw;
    const json& n = require(doc, "n");
    if (!n.is_number_integer() || n.get<long long>() < 1 || n.get<long long>() > 100000) {
        malformed("'n' must be a positive integer");
    }
    raw.n = n.get<int>();
    raw.initial = int_array(require(doc, "initial"), "initial");
    raw.profiles = read_profiles(require(doc, "profiles"), raw.n, "profiles");
    if (auto it = doc.find("truth"); it != doc.end()) {
        raw.truth = read_profiles(*it, raw.n, "truth");
    }
    return raw;
}

Instance parse_instance(std::string_view text) { return validate_instance(parse_raw_instance(text)); }

std::string serialize_instance(const Instance& instance, bool pretty) {
    ordered_json doc;
    doc["n"] = instance.size();
    doc["initial"] = instance.initial();
    doc["profiles"] = profiles_json(instance.reported_profile());
    if (instance.has_truth()) {
        doc["truth"] = profiles_json(instance.truth_profile());
    }
    return doc.dump(pretty ? 2 : -1);
}

Instance load_instance_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidArgument, "cannot read " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

std::uint64_t uniform_below(std::uint64_t bound, std::mt19937_64& rng) {
    if (bound == 0) {
        throw Error(ErrorCode::InvalidArgument, "uniform_below needs a positive bound");
    }
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) {
        x = rng();
    }
    return x % bound;
}

namespace {

double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<AgentId> random_ranking(int n, std::mt19937_64& rng) {
    std::vector<AgentId> ranking(static_cast<std::size_t>(n));
    std::iota(ranking.begin(), ranking.end(), 1);
    for (std::size_t k = ranking.size(); k > 1; --k) {
        std::swap(ranking[k - 1], ranking[uniform_below(k, rng)]);
    }
    return ranking;
}

// Builds a symmetric market from an undirected edge list, drawing preferences and the
// initial set from `rng`.
Instance symmetric_market(int n, const std::vector<std::pair<AgentId, AgentId>>& edges, std::mt19937_64& rng) {
    if (n < 1) {
        throw Error(ErrorCode::InvalidArgument, "a market needs at least one agent");
    }
    RawInstance raw;
    raw.n = n;
    raw.profiles.resize(static_cast<std::size_t>(n));
    for (auto [a, b] : edges) {
        raw.profiles[static_cast<std::size_t>(a - 1)].neighbors.push_back(b);
        raw.profiles[static_cast<std::size_t>(b - 1)].neighbors.push_back(a);
    }
    for (auto& p : raw.profiles) {
        p.pref = random_ranking(n, rng);
    }
    while (raw.initial.empty()) {
        for (AgentId i = 1; i <= n; ++i) {
            if (rng() & 1U) {
                raw.initial.push_back(i);
            }
        }
    }
    return validate_instance(raw);
}

} // namespace

Instance gen_random(int n, double edge_probability, std::uint64_t seed) {
    if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "edge probability must lie in [0, 1]");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId a = 1; a <= n; ++a) {
        for (AgentId b = a + 1; b <= n; ++b) {
            if (unit_interval(rng) < edge_probability) {
                edges.emplace_back(a, b);
            }
        }
    }
    return symmetric_market(n, edges, rng);
}

Instance gen_line(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId a = 1; a < n; ++a) {
        edges.emplace_back(a, a + 1);
    }
    return symmetric_market(n, edges, rng);
}

Instance gen_complete(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId a = 1; a <= n; ++a) {
        for (AgentId b = a + 1; b <= n; ++b) {
            edges.emplace_back(a, b);
        }
    }
    return symmetric_market(n, edges, rng);
}

Instance gen_tree(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId child = 2; child <= n; ++child) {
        edges.emplace_back(static_cast<AgentId>(uniform_below(static_cast<std::uint64_t>(child - 1), rng)) + 1, child);
    }
    return symmetric_market(n, edges, rng);
}

// ---------------------------------------------------------------------------------------------
// Fixtures

namespace {

struct FixtureSource {
    const char* name;
    const char* description;
    const char* document;
    std::vector<std::pair<const char*, std::vector<AgentId>>> expected;
};

std::vector<FixtureSource> fixture_sources() {
    return {
        {"single", "one agent, one house",
         R"({"n":1,"initial":[1],"profiles":{"1":{"pref":[1],"neighbors":[]}}})",
         {{"ttc", {1}}, {"swn", {1}}, {"ls", {1}}, {"ctc", {1}}}},
        {"fig2",
         "three agents; agent 2 can hide agent 3 from the market. Initial agents {1,2}",
         R"({"n":3,"initial":[1,2],"profiles":{
            "1":{"pref":[3,2,1],"neighbors":[2]},
            "2":{"pref":[1,2,3],"neighbors":[1,3]},
            "3":{"pref":[1,3,2],"neighbors":[1,2]}}})",
         {{"ttc", {3, 2, 1}}, {"po-ir", {3, 2, 1}}, {"po-ir", {2, 1, 3}}, {"ttc-agent2-hides-3", {2, 1, 3}}}},
        {"fig3a", "four agents where no mechanism can be optimal under weakly complete components and IC",
         R"({"n":4,"initial":[1,2],"profiles":{
            "1":{"pref":[4,2,1,3],"neighbors":[2,3]},
            "2":{"pref":[3,2,1,4],"neighbors":[1,4]},
            "3":{"pref":[1,3,2,4],"neighbors":[1,2]},
            "4":{"pref":[1,4,2,3],"neighbors":[1,2]}}})",
         {{"optimal-wcc-ir", {4, 2, 3, 1}}, {"optimal-wcc-ir", {2, 3, 1, 4}}}},
        {"fig3b", "fig3a after agent 2 stops inviting agent 4",
         R"({"n":4,"initial":[1,2],"profiles":{
            "1":{"pref":[4,2,1,3],"neighbors":[2,3]},
            "2":{"pref":[3,2,1,4],"neighbors":[1]},
            "3":{"pref":[1,3,2,4],"neighbors":[1,2]},
            "4":{"pref":[1,4,2,3],"neighbors":[1,2]}}})",
         {{"optimal-wcc-ir", {2, 3, 1, 4}}}},
        {"fig3c", "fig3a after agent 1 stops inviting agent 3",
         R"({"n":4,"initial":[1,2],"profiles":{
            "1":{"pref":[4,2,1,3],"neighbors":[2]},
            "2":{"pref":[3,2,1,4],"neighbors":[1,4]},
            "3":{"pref":[1,3,2,4],"neighbors":[1,2]},
            "4":{"pref":[1,4,2,3],"neighbors":[1,2]}}})",
         {{"optimal-wcc-ir", {4, 2, 3, 1}}}},
        {"fig4", "line of four agents; a stable-cc allocation that is not optimal-cc",
         R"({"n":4,"initial":[1],"profiles":{
            "1":{"pref":[3,2,1,4],"neighbors":[2]},
            "2":{"pref":[4,1,2,3],"neighbors":[1,3]},
            "3":{"pref":[1,4,3,2],"neighbors":[2,4]},
            "4":{"pref":[2,3,4,1],"neighbors":[3]}}})",
         {{"stable-cc-not-optimal-cc", {2, 1, 4, 3}}, {"optimal-cc-dominator", {2, 4, 1, 3}}}},
        {"fig5", "line of four agents where sharing neighbors lets the ends trade",
         R"({"n":4,"initial":[2],"profiles":{
            "1":{"pref":[4,1,2,3],"neighbors":[2]},
            "2":{"pref":[3,2,1,4],"neighbors":[1,3]},
            "3":{"pref":[2,3,1,4],"neighbors":[2,4]},
            "4":{"pref":[1,4,2,3],"neighbors":[3]}}})",
         {{"swn", {1, 3, 2, 4}}, {"ls", {4, 3, 2, 1}}}},
        {"fig6", "five agents; favorite pointing graph with one cycle and a hanging path",
         R"({"n":5,"initial":[1],"profiles":{
            "1":{"pref":[5,2,1,3,4],"neighbors":[2,3]},
            "2":{"pref":[3,2,1,4,5],"neighbors":[1,4]},
            "3":{"pref":[4,1,3,2,5],"neighbors":[1,5]},
            "4":{"pref":[1,4,2,3,5],"neighbors":[2]},
            "5":{"pref":[3,5,1,2,4],"neighbors":[3]}}})",
         {}},
        {"appendixA", "six-agent connected trading cycles walk-through",
         R"({"n":6,"initial":[1],"profiles":{
            "1":{"pref":[5,1,2,3,4,6],"neighbors":[2,3,4]},
            "2":{"pref":[4,1,2,3,5,6],"neighbors":[1]},
            "3":{"pref":[1,6,3,2,4,5],"neighbors":[1]},
            "4":{"pref":[2,4,1,3,5,6],"neighbors":[1,3,5,6]},
            "5":{"pref":[1,3,4,5,2,6],"neighbors":[4]},
            "6":{"pref":[3,6,1,2,4,5],"neighbors":[4]}}})",
         {{"ctc", {5, 1, 3, 2, 4, 6}}}},
    };
}

const std::vector<Fixture>& fixture_registry() {
    static const std::vector<Fixture> registry = [] {
        std::vector<Fixture> out;
        for (const auto& src : fixture_sources()) {
            std::vector<FixtureExpectation> expected;
            for (const auto& [label, houses] : src.expected) {
                expected.push_back({label, Allocation(houses)});
            }
            out.push_back({src.name, src.description, parse_instance(src.document), std::move(expected)});
        }
        return out;
    }();
    return registry;
}

} // namespace

std::vector<Allocation> Fixture::expected_for(std::string_view label) const {
    std::vector<Allocation> out;
    for (const auto& e : expected) {
        if (e.label == label) {
            out.push_back(e.allocation);
        }
    }
    return out;
}

std::vector<std::string> fixture_names() {
    std::vector<std::string> names;
    for (const auto& f : fixture_registry()) {
        names.push_back(f.name);
    }
    return names;
}

const Fixture& paper_fixture(std::string_view name) {
    for (const auto& f : fixture_registry()) {
        if (f.name == name) {
            return f;
        }
    }
    throw Error(ErrorCode::UnknownFixture, "no fixture named '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------------------------
// Exhaustive enumeration

std::vector<std::vector<AgentId>> truncated_rankings(int n, AgentId self) {
    std::vector<AgentId> others;
    for (AgentId h = 1; h <= n; ++h) {
        if (h != self) {
            others.push_back(h);
        }
    }
    std::vector<std::vector<AgentId>> out;
    // Ordered selections of `others` by increasing length, lexicographic within a length.
    std::vector<AgentId> prefix;
    std::function<void(std::size_t)> extend = [&](std::size_t length) {
        if (prefix.size() == length) {
            std::vector<AgentId> ranking = prefix;
            ranking.push_back(self);
            for (AgentId h : others) {
                if (std::find(prefix.begin(), prefix.end(), h) == prefix.end()) {
                    ranking.push_back(h);
                }
            }
            out.push_back(std::move(ranking));
            return;
        }
        for (AgentId h : others) {
            if (std::find(prefix.begin(), prefix.end(), h) == prefix.end()) {
                prefix.push_back(h);
                extend(length);
                prefix.pop_back();
            }
        }
    };
    for (std::size_t length = 0; length <= others.size(); ++length) {
        extend(length);
    }
    return out;
}

namespace {

using Perm = std::vector<int>; // zero-based image of each agent

struct EdgeCode {
    std::uint32_t edges = 0;   // bit per unordered pair
    std::uint32_t initial = 0; // bit per agent
};

int pair_index(int a, int b, int n) {
    if (a > b) {
        std::swap(a, b);
    }
    return a * n - a * (a + 1) / 2 + (b - a - 1);
}

EdgeCode apply(const EdgeCode& net, const Perm& p, int n) {
    EdgeCode out;
    for (int a = 0; a < n; ++a) {
        if (net.initial >> a & 1U) {
            out.initial |= 1U << p[static_cast<std::size_t>(a)];
        }
        for (int b = a + 1; b < n; ++b) {
            if (net.edges >> pair_index(a, b, n) & 1U) {
                out.edges |= 1U << pair_index(p[static_cast<std::size_t>(a)], p[static_cast<std::size_t>(b)], n);
            }
        }
    }
    return out;
}

bool less(const EdgeCode& x, const EdgeCode& y) {
    return std::tie(x.edges, x.initial) < std::tie(y.edges, y.initial);
}

bool every_component_initial(const EdgeCode& net, int n) {
    std::uint32_t seen = net.initial;
    std::vector<int> stack;
    for (int a = 0; a < n; ++a) {
        if (net.initial >> a & 1U) {
            stack.push_back(a);
        }
    }
    while (!stack.empty()) {
        const int a = stack.back();
        stack.pop_back();
        for (int b = 0; b < n; ++b) {
            if (b != a && !(seen >> b & 1U) && (net.edges >> pair_index(a, b, n) & 1U)) {
                seen |= 1U << b;
                stack.push_back(b);
            }
        }
    }
    return seen == (1U << n) - 1U;
}

} // namespace

SmallMarketSpace::SmallMarketSpace(int n) : n_(n) {
    if (n < 1 || n > 5) {
        throw Error(ErrorCode::CapExceeded, "exhaustive enumeration supports 1 to 5 agents");
    }
    std::vector<Perm> perms;
    {
        Perm p(static_cast<std::size_t>(n));
        std::iota(p.begin(), p.end(), 0);
        do {
            perms.push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
    }

    std::vector<std::map<std::vector<AgentId>, int>> code_of(static_cast<std::size_t>(n));
    for (AgentId a = 1; a <= n; ++a) {
        rankings_.push_back(truncated_rankings(n, a));
        for (std::size_t c = 0; c < rankings_.back().size(); ++c) {
            code_of[static_cast<std::size_t>(a - 1)][rankings_.back()[c]] = static_cast<int>(c);
        }
    }

    auto relabel = [&](const Perm& p, int a, int c) {
        const auto& r = rankings_[static_cast<std::size_t>(a)][static_cast<std::size_t>(c)];
        const int self = p[static_cast<std::size_t>(a)];
        std::vector<AgentId> mapped;
        for (AgentId h : r) {
            const AgentId image = p[static_cast<std::size_t>(h - 1)] + 1;
            mapped.push_back(image);
            if (image == self + 1) {
                break;
            }
        }
        std::vector<AgentId> full = mapped;
        for (AgentId h = 1; h <= n; ++h) {
            if (std::find(mapped.begin(), mapped.end(), h) == mapped.end()) {
                full.push_back(h);
            }
        }
        return code_of[static_cast<std::size_t>(self)].at(full);
    };

    const int pairs = n * (n - 1) / 2;
    for (std::uint32_t edges = 0; edges < (1U << pairs); ++edges) {
        for (std::uint32_t initial = 1; initial < (1U << n); ++initial) {
            const EdgeCode net{edges, initial};
            if (!every_component_initial(net, n)) {
                continue;
            }
            bool canonical = true;
            std::vector<const Perm*> automorphisms;
            for (const auto& p : perms) {
                const EdgeCode image = apply(net, p, n);
                if (less(image, net)) {
                    canonical = false;
                    break;
                }
                if (!less(net, image) && p != perms.front()) {
                    automorphisms.push_back(&p);
                }
            }
            if (!canonical) {
                continue;
            }
            SmallMarketSpace::Network out;
            out.neighbors.resize(static_cast<std::size_t>(n));
            for (int a = 0; a < n; ++a) {
                if (initial >> a & 1U) {
                    out.initial.push_back(a + 1);
                }
                for (int b = 0; b < n; ++b) {
                    if (b != a && (edges >> pair_index(a, b, n) & 1U)) {
                        out.neighbors[static_cast<std::size_t>(a)].push_back(b + 1);
                    }
                }
            }
            for (const Perm* p : automorphisms) {
                out.automorphisms.push_back(*p);
                std::vector<std::vector<int>> per_agent(static_cast<std::size_t>(n));
                for (int a = 0; a < n; ++a) {
                    for (int c = 0; c < codes(); ++c) {
                        per_agent[static_cast<std::size_t>(a)].push_back(relabel(*p, a, c));
                    }
                }
                out.relabel.push_back(std::move(per_agent));
            }
            networks_.push_back(std::move(out));
        }
    }
}

std::uint64_t SmallMarketSpace::profile_count() const {
    std::uint64_t count = 1;
    for (int a = 0; a < n_; ++a) {
        count *= static_cast<std::uint64_t>(codes());
    }
    return count;
}

void SmallMarketSpace::decode(std::uint64_t index, std::vector<int>& profile) const {
    profile.resize(static_cast<std::size_t>(n_));
    for (int a = n_ - 1; a >= 0; --a) {
        profile[static_cast<std::size_t>(a)] = static_cast<int>(index % static_cast<std::uint64_t>(codes()));
        index /= static_cast<std::uint64_t>(codes());
    }
}

bool SmallMarketSpace::representative(const Network& network, const std::vector<int>& profile) const {
    std::vector<int> image(profile.size());
    for (std::size_t t = 0; t < network.automorphisms.size(); ++t) {
        const auto& p = network.automorphisms[t];
        for (std::size_t a = 0; a < profile.size(); ++a) {
            image[static_cast<std::size_t>(p[a])] = network.relabel[t][a][static_cast<std::size_t>(profile[a])];
        }
        if (image < profile) {
            return false;
        }
    }
    return true;
}

RawInstance SmallMarketSpace::raw_instance(const Network& network, const std::vector<int>& profile) const {
    RawInstance raw;
    raw.n = n_;
    raw.initial = network.initial;
    raw.profiles.resize(static_cast<std::size_t>(n_));
    for (AgentId a = 1; a <= n_; ++a) {
        raw.profiles[static_cast<std::size_t>(a - 1)].neighbors = network.neighbors[static_cast<std::size_t>(a - 1)];
        raw.profiles[static_cast<std::size_t>(a - 1)].pref = ranking(a, profile[static_cast<std::size_t>(a - 1)]);
    }
    return raw;
}

EnumerationStats enumerate_small_markets(int n, const std::function<bool(const Instance&)>& visit) {
    const SmallMarketSpace space(n);
    EnumerationStats stats;
    std::vector<int> profile;
    for (const auto& network : space.networks()) {
        ++stats.networks;
        for (std::uint64_t index = 0; index < space.profile_count(); ++index) {
            space.decode(index, profile);
            if (!space.representative(network, profile)) {
                continue;
            }
            ++stats.instances;
            if (!visit(validate_instance(space.raw_instance(network, profile)))) {
                return stats;
            }
        }
    }
    return stats;
}

} // namespace netswap
