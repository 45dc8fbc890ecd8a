#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdlvq/labeling.hpp"
#include "mdlvq/nested.hpp"
#include "mdlvq/weights.hpp"

namespace mdlvq {

using Json = nlohmann::json;

struct FormatError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kSystemVersion = 1;
inline constexpr int kLabelingVersion = 1;

namespace detail {

inline Json matrixJson(const IMat& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.n; ++i) {
        Json r = Json::array();
        for (int j = 0; j < m.n; ++j) r.push_back(m(i, j));
        rows.push_back(std::move(r));
    }
    return rows;
}

template <class T>
T need(const Json& j, const char* key) {
    if (!j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw FormatError(std::string("bad field '") + key + "': " + e.what());
    }
}

}  // namespace detail

inline Json toJson(const Multiplier& m) { return {{"kind", multiplierKindName(m.kind)}, {"a", m.a}, {"b", m.b}}; }

inline Multiplier multiplierFromJson(const Json& j) {
    Multiplier m;
    m.kind = multiplierKindFromName(detail::need<std::string>(j, "kind"));
    m.a = detail::need<int64_t>(j, "a");
    m.b = j.value("b", int64_t{0});
    return m;
}

inline Json toJson(const NestedSystem& s) {
    Json subs = Json::array();
    for (int i = 0; i < s.n; ++i) {
        Json e = toJson(s.specs[i]);
        e["matrix"] = detail::matrixJson(s.subs[i].scale);
        e["index"] = s.subs[i].index;
        subs.push_back(std::move(e));
    }
    return {{"version", kSystemVersion},
            {"lattice", {{"kind", kindName(s.central.kind)}, {"dim", s.central.dim}, {"scale", s.central.scale}}},
            {"sublattices", subs},
            {"productRule", s.rule == ProductRule::Full ? "full" : "dedup"},
            {"product", {{"matrix", detail::matrixJson(s.product.scale)}, {"index", s.product.index}}},
            {"mu", s.mu}};
}

inline NestedSystem systemFromJson(const Json& j) {
    const int v = detail::need<int>(j, "version");
    if (v != kSystemVersion) throw FormatError("unsupported system descriptor version " + std::to_string(v));
    const Json& lat = j.at("lattice");
    const auto central = makeLattice(kindFromName(detail::need<std::string>(lat, "kind")), detail::need<int>(lat, "dim"),
                                     lat.value("scale", 1.0));
    std::vector<Multiplier> specs;
    for (const auto& e : j.at("sublattices")) specs.push_back(multiplierFromJson(e));
    const std::string rule = j.value("productRule", std::string("dedup"));
    if (rule != "dedup" && rule != "full") throw FormatError("unknown product rule " + rule);
    auto sys = buildNested(central, specs, detail::need<std::vector<double>>(j, "mu"),
                           rule == "full" ? ProductRule::Full : ProductRule::Dedup);
    const auto& subs = j.at("sublattices");
    for (int i = 0; i < sys.n; ++i)
        if (subs[i].contains("matrix") && subs[i]["matrix"] != detail::matrixJson(sys.subs[i].scale))
            throw FormatError("sublattice " + std::to_string(i) + " matrix does not match its multiplier");
    if (j.contains("product") && j["product"].contains("matrix") &&
        j["product"]["matrix"] != detail::matrixJson(sys.product.scale))
        throw FormatError("product matrix does not match the sublattices");
    return sys;
}

inline Json toJson(const WeightProfile& p) {
    Json g = Json::object();
    for (Mask m = 1; m + 1 < (Mask{1} << p.n); ++m) g[maskName(m, p.n)] = p.gamma[m];
    Json j = {{"n", p.n}, {"gamma", g}, {"mu", p.mu}};
    if (!unitRadii(p)) {
        Json c = Json::array();
        for (int i = 0; i < p.n; ++i) {
            Json r = Json::array();
            for (int k = 0; k < p.n; ++k) r.push_back(i == k ? 0.0 : p.radiusFactor(i, k));
            c.push_back(std::move(r));
        }
        j["c"] = std::move(c);
    }
    return j;
}

// Missing subsets default to weight 1.
inline WeightProfile profileFromJson(const Json& j) {
    const int n = detail::need<int>(j, "n");
    WeightProfile p = uniformProfile(n);
    if (j.contains("gamma")) {
        for (auto it = j["gamma"].begin(); it != j["gamma"].end(); ++it) {
            const Mask m = maskFromName(it.key(), n);
            if (m == 0 || m + 1 == (Mask{1} << n)) throw FormatError("gamma keys must be proper nonempty subsets");
            p.gamma[m] = it.value().get<double>();
        }
    }
    if (j.contains("mu")) p.mu = j["mu"].get<std::vector<double>>();
    if (j.contains("c")) {
        const auto c = j["c"].get<std::vector<std::vector<double>>>();
        if (static_cast<int>(c.size()) != n) throw FormatError("radius factor table must be n×n");
        for (int i = 0; i < n; ++i) {
            if (static_cast<int>(c[i].size()) != n) throw FormatError("radius factor table must be n×n");
            for (int k = 0; k < n; ++k) p.c[i * n + k] = (i == k) ? 1.0 : c[i][k];
        }
    }
    const auto v = validate(p);
    if (!v.ok) throw FormatError(v.message);
    return p;
}

inline Json toJson(const LabelingFunction& lab) {
    const NestedSystem& sys = *lab.sys;
    Json entries = Json::array();
    for (size_t p = 0; p < lab.forward.size(); ++p)
        entries.push_back({{"c", sys.centralCell[p]}, {"tuple", lab.forward[p]}});
    return {{"version", kLabelingVersion},
            {"system", toJson(sys)},
            {"profile", toJson(lab.profile)},
            {"psi", lab.psi},
            {"entries", entries}};
}

inline LabelingFunction labelingFromJson(const Json& j) {
    const int v = detail::need<int>(j, "version");
    if (v != kLabelingVersion) throw FormatError("unsupported labeling version " + std::to_string(v));
    auto sys = std::make_shared<const NestedSystem>(systemFromJson(j.at("system")));
    LabelingFunction lab;
    lab.sys = sys;
    lab.profile = profileFromJson(j.at("profile"));
    lab.psi = detail::need<double>(j, "psi");
    const auto& entries = j.at("entries");
    if (static_cast<int64_t>(entries.size()) != sys->productIndex())
        throw FormatError("labeling has " + std::to_string(entries.size()) + " entries, expected " +
                          std::to_string(sys->productIndex()));
    lab.forward.assign(entries.size(), {});
    std::vector<char> seen(entries.size(), 0);
    for (const auto& e : entries) {
        const auto c = e.at("c").get<std::vector<int64_t>>();
        const auto it = sys->centralIndex.find(c);
        if (it == sys->centralIndex.end()) throw FormatError("entry point is not a canonical central point");
        if (seen[it->second]++) throw FormatError("duplicate entry for a central point");
        auto t = e.at("tuple").get<Tuple>();
        if (static_cast<int>(t.size()) != sys->n) throw FormatError("tuple has the wrong arity");
        for (int i = 0; i < sys->n; ++i) {
            if (static_cast<int>(t[i].size()) != sys->L()) throw FormatError("tuple element has the wrong dimension");
            if (!inSublattice(sys->subs[i], t[i])) throw FormatError("tuple element is not in its sublattice");
        }
        lab.forward[it->second] = std::move(t);
    }
    try {
        rebuildInverse(lab);
    } catch (const ConstructionError& e) {
        throw FormatError(e.what());
    }
    lab.cost = evaluateLabeling(lab);
    lab.certified = false;
    return lab;
}

}  // namespace mdlvq
