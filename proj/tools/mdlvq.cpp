// mdlvq: build labelings, simulate erasure channels, print analysis tables, run self-checks.
// Exit codes: 0 ok, 1 internal failure, 2 invalid input.

#include <CLI11.hpp>
#include <fmt/core.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

#include "mdlvq/mdlvq.hpp"

using namespace mdlvq;

namespace {

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

Json readJson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw InputError("cannot write " + out);
    f << text;
}

struct Flags {
    std::string config, out;
    std::optional<uint64_t> seed;
    int workers = 1;
};

// The experiment config: one JSON document per run.
struct Experiment {
    Json raw;
    std::shared_ptr<const NestedSystem> sys;
    WeightProfile profile;
    TranslateMode mode = TranslateMode::Single;
    SimConfig sim;
    std::string labelingPath;
};

Experiment loadExperiment(const Flags& fl) {
    if (fl.config.empty()) throw InputError("--config is required");
    Experiment e;
    e.raw = readJson(fl.config);
    const Json& j = e.raw;
    try {
        const auto kind = kindFromName(j.value("lattice", std::string("Z")));
        const int L = j.value("L", 1);
        const int n = static_cast<int>(j.at("sublattices").size());
        std::vector<Multiplier> specs;
        for (const auto& s : j.at("sublattices")) specs.push_back(multiplierFromJson(s));
        Json pj = {{"n", n}};
        if (j.contains("gamma")) pj["gamma"] = j["gamma"];
        if (j.contains("mu")) pj["mu"] = j["mu"];
        if (j.contains("c")) pj["c"] = j["c"];
        e.profile = profileFromJson(pj);
        e.sim.source.sigma2 = j.contains("source") ? j["source"].value("sigma2", 1.0) : 1.0;
        e.sim.source.mean = j.contains("source") ? j["source"].value("mean", 0.0) : 0.0;
        if (!(e.sim.source.sigma2 > 0.0)) throw InputError("source variance must be positive");
        double scale = j.value("scale", 1.0);
        if (j.contains("sideRate")) {
            // central scale giving description 0 the requested rate in bits per dimension
            const double nu1 = makeLattice(kind, L).cellVolume;
            const double N0 = static_cast<double>(makeSublattice(makeLattice(kind, L), multiplierMatrix(makeLattice(kind, L), specs.at(0))).index);
            const double nu = std::exp2(gaussianLogEntropy(L, e.sim.source.sigma2) - L * j["sideRate"].get<double>()) /
                              (N0 * e.profile.mu[0]);
            scale = std::pow(nu / nu1, 1.0 / L);
        }
        if (!(scale > 0.0)) throw InputError("lattice scale must be positive");
        const std::string rule = j.value("productRule", std::string("dedup"));
        if (rule != "dedup" && rule != "full") throw InputError("productRule must be dedup or full");
        e.sys = std::make_shared<const NestedSystem>(buildNested(makeLattice(kind, L, scale), specs, e.profile.mu,
                                                                 rule == "full" ? ProductRule::Full : ProductRule::Dedup));
        e.mode = translateModeFromName(j.value("translateMode", std::string("single")));
        e.sim.samples = j.value("samples", int64_t{100000});
        e.sim.seed = fl.seed ? *fl.seed : j.value("seed", uint64_t{1});
        e.sim.workers = fl.workers;
        e.sim.erasureProb = j.value("erasureProb", 0.0);
        e.sim.blockSize = j.value("blockSize", int64_t{1} << 16);
        e.labelingPath = j.value("labeling", std::string());
        if (e.sim.samples < 1) throw InputError("samples must be >= 1");
    } catch (const Json::exception& ex) {
        throw InputError(std::string("config: ") + ex.what());
    }
    return e;
}

int cmdBuildLabeling(const Flags& fl) {
    const auto e = loadExperiment(fl);
    GenerateOptions opt;
    opt.workers = fl.workers;
    const auto lab = buildLabeling(e.sys, e.profile, opt, e.mode);
    emit(toJson(lab).dump(1) + "\n", fl.out);
    std::cerr << fmt::format("N_pi={} psi={:.6f} f={:.6e} g={:.6e} outside={:.4f}\n", e.sys->productIndex(), lab.psi,
                             lab.cost.f, lab.cost.g, outsideFraction(lab));
    return 0;
}

int cmdSimulate(const Flags& fl) {
    const auto e = loadExperiment(fl);
    LabelingFunction lab;
    if (!e.labelingPath.empty()) {
        lab = labelingFromJson(readJson(e.labelingPath));
        if (toJson(*lab.sys) != toJson(*e.sys)) throw InputError("labeling was built for a different system");
        if (toJson(lab.profile) != toJson(e.profile)) throw InputError("labeling was built for a different weight profile");
    } else {
        GenerateOptions opt;
        opt.workers = fl.workers;
        lab = buildLabeling(e.sys, e.profile, opt, e.mode);
    }
    const auto r = simulate(lab, e.sim);
    emit(simCsv(r).str(), fl.out);
    return 0;
}

// Knobs for the analysis tables come from the optional config.
struct AnalyzeKnobs {
    Json j = Json::object();
    template <class T>
    T get(const char* k, T def) const {
        try {
            return j.value(k, def);
        } catch (const Json::exception& ex) {
            throw InputError(std::string("config field '") + k + "': " + ex.what());
        }
    }
};

void requireOddL(int L) {
    if (L < 1 || L % 2 == 0) throw UnsupportedError("L=" + std::to_string(L) + " is unsupported; closed forms exist for odd L only");
    if (L > kMaxOddL) throw UnsupportedError("L=" + std::to_string(L) + " exceeds the supported maximum " + std::to_string(kMaxOddL));
}

int cmdAnalyze(const std::string& sub, const Flags& fl, std::optional<int> Lflag) {
    AnalyzeKnobs k;
    if (!fl.config.empty()) k.j = readJson(fl.config);
    CsvTable t{kTableSchema, {}, {}};
    if (sub == "fig2") {
        const int Lmax = Lflag.value_or(k.get("Lmax", 21));
        requireOddL(Lmax);
        t = fig2Csv(fig2Data(Lmax));
        t.header.push_back("ordered");
        for (auto& r : t.rows) r.push_back(std::stod(r[2]) < std::stod(r[1]) ? "true" : "false");
    } else if (sub == "rateloss") {
        t.header = {"L", "G_central", "rate_loss"};
        std::vector<int> Ls = Lflag ? std::vector<int>{*Lflag} : k.get("Ls", std::vector<int>{1, 3});
        for (int L : Ls) {
            requireOddL(L);
            double G = k.get("G", -1.0);
            if (G <= 0.0) {
                if (L == 1) G = 1.0 / 12.0;
                else if (L == 3) G = kBccSecondMoment;
                else throw InputError("G must be given for L=" + std::to_string(L));
            }
            t.rows.push_back({std::to_string(L), num(G), num(rateLoss(L, G))});
        }
    } else if (sub == "psi-table") {
        t.header = {"L", "beta", "beta_tilde", "psi3", "phi"};
        const int lo = k.get("Lmin", 1), hi = Lflag.value_or(k.get("Lmax", 21));
        requireOddL(lo);
        requireOddL(hi);
        for (int L = lo; L <= hi; L += 2)
            t.rows.push_back({std::to_string(L), num(betaL(L)), num(betaTildeL(L)), num(psi3(L)), num(phiL(L))});
    } else if (sub == "product") {
        const int L = Lflag.value_or(k.get("L", 1));
        requireOddL(L);
        const auto R = k.get("R", std::array<double, 3>{4.0, 4.0, 4.0});
        const auto grid = k.get("aGrid", std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
        auto p = uniformProfile(3);
        if (k.j.contains("gamma")) p = profileFromJson({{"n", 3}, {"gamma", k.j["gamma"]}});
        const double G = L == 1 ? 1.0 / 12.0 : k.get("G", sphereSecondMoment(L));
        const double hX = gaussianLogEntropy(L, k.get("sigma2", 1.0));
        const auto rep = tradeoffSweep(grid, p, L, hX, R, G, {0b001, 0b011});
        t.header = {"a", "central_rate", "central_mse", "side_0_mse", "pair_01_mse", "product"};
        for (const auto& r : rep.rows)
            t.rows.push_back({num(r.a), num(r.centralRate), num(r.centralDistortion), num(r.sideDistortions[0]),
                              num(r.sideDistortions[1]), num(r.product)});
    } else if (sub == "pradhan") {
        const double R = k.get("R", 4.0);
        t.header = {"rho", "noise_var", "mmse_1", "mmse_2", "mmse_3", "product", "gaussian_limit"};
        for (double rho : k.get("rhoGrid", std::vector<double>{-0.45, -0.25, 0.0, 0.25, 0.5})) {
            const auto q = pradhanInnerBound(rho, R);
            t.rows.push_back({num(rho), num(q.sigmaQ2), num(q.mmse1), num(q.mmse2), num(q.mmse3), num(q.product),
                              num(gaussianLimitProduct(R))});
        }
    } else if (sub == "binning-threshold") {
        const int L = Lflag.value_or(k.get("L", 1));
        requireOddL(L);
        const double R = k.get("R", 5.0), Np = k.get("nestingRatio", 1.0);
        if (!(Np >= 1.0)) throw InputError("nestingRatio must be >= 1");
        t.header = {"L", "R", "nesting_ratio", "threshold"};
        t.rows.push_back({std::to_string(L), num(R), num(Np), num(binningThreshold(R, Np, L))});
    } else {
        throw InputError("unknown analysis " + sub);
    }
    emit(t.str(), fl.out);
    return 0;
}

// Self-checks; a suite fails when any of its checks exceeds its tolerance.
struct Suite {
    std::string name;
    Json checks = Json::array();
    bool pass = true;
    void add(const std::string& what, double value, double tol) {
        const bool ok = value <= tol;
        pass = pass && ok;
        checks.push_back({{"check", what}, {"value", value}, {"tolerance", tol}, {"pass", ok}});
    }
};

Suite verifyIdentities(uint64_t seed) {
    Suite s{"identities"};
    RngStream r(seed, StreamTag::Source, 0);
    for (int n = 2; n <= 5; ++n) {
        double worstT = 0.0, worstA = 0.0;
        for (int t = 0; t < 1000; ++t) {
            auto p = uniformProfile(n);
            for (Mask m = 1; m + 1 < (Mask{1} << n); ++m) p.g(m) = 0.05 + 3.0 * r.uniform();
            for (double& v : p.mu) v = 0.5 + r.uniform();
            const int L = 1 + static_cast<int>(r.below(4));
            auto pt = [&] {
                std::vector<double> x(L);
                for (double& v : x) v = 10.0 * r.uniform() - 5.0;
                return x;
            };
            std::vector<std::vector<double>> lam(n);
            for (auto& l : lam) l = pt();
            const auto lc = pt();
            for (int k = 1; k < n; ++k) worstT = std::max(worstT, checkDecomposition(p, k, lc, lam).relative());
            const auto rep = checkWeightIdentities(p, lc, lam);
            worstA = std::max(worstA, *std::max_element(rep.worst.begin(), rep.worst.end()));
        }
        s.add(fmt::format("decomposition n={}", n), worstT, 1e-9);
        s.add(fmt::format("appendix identities n={}", n), worstA, 1e-9);
    }
    return s;
}

Suite verifyOracle(uint64_t seed, int workers, int64_t samples, double perturb) {
    Suite s{"oracle"};
    for (int L : {1, 3, 5}) {
        const auto o = mcIntersectionOracle(L, samples, seed, workers);
        s.add(fmt::format("beta L={}", L), std::abs(perturb * betaL(L) / o.count - 1.0), 1e-3);
        s.add(fmt::format("beta_tilde L={}", L), std::abs(perturb * betaTildeL(L) / o.moment - 1.0), 1e-3);
    }
    return s;
}

Suite verifyMatching() {
    Suite s{"matching"};
    const auto z1 = makeLattice(LatticeKind::Z, 1);
    const auto z2 = makeLattice(LatticeKind::Z, 2);
    const Multiplier two{MultiplierKind::Scalar, 2, 0}, three{MultiplierKind::Scalar, 3, 0};
    const std::vector<std::pair<LatticeSpec, std::vector<Multiplier>>> corpus{
        {z1, {two, three}},
        {z1, {{MultiplierKind::Scalar, 1, 0}, {MultiplierKind::Scalar, 7, 0}}},
        {z2, {{MultiplierKind::Gaussian, 1, 1}, {MultiplierKind::Gaussian, 2, 0}}},
        {z1, {{MultiplierKind::Scalar, 1, 0}, two, three}},
    };
    for (const auto& [lat, specs] : corpus) {
        const int n = static_cast<int>(specs.size());
        auto sys = std::make_shared<const NestedSystem>(buildNested(lat, specs, std::vector<double>(n, 1.0)));
        const auto lab = buildLabeling(sys, uniformProfile(n));
        std::vector<int> perm(lab.forward.size());
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do {
            double c = 0.0;
            for (size_t p = 0; p < perm.size(); ++p)
                c += assignmentCost(*sys, lab.profile, sys->coords(sys->centralCell[p]), lab.forward[perm[p]]);
            best = std::min(best, c);
        } while (std::next_permutation(perm.begin(), perm.end()));
        s.add(fmt::format("brute force N_pi={}", sys->productIndex()), std::abs(lab.matchingCost - best), 1e-9);
    }
    return s;
}

int cmdVerify(const Flags& fl, const std::vector<std::string>& suites, bool noneGiven, double perturb,
              int64_t oracleSamples) {
    const uint64_t seed = fl.seed.value_or(1);
    Json rep = {{"suites", Json::array()}, {"warnings", Json::array()}};
    bool all = true;
    std::vector<std::string> run = noneGiven ? std::vector<std::string>{"identities", "oracle", "matching"} : suites;
    std::erase(run, std::string());
    if (!noneGiven && run.empty()) rep["warnings"].push_back("empty suite selection; zero checks run");
    for (const auto& name : run) {
        Suite s;
        if (name == "identities") s = verifyIdentities(seed);
        else if (name == "oracle") s = verifyOracle(seed, fl.workers, oracleSamples, perturb);
        else if (name == "matching") s = verifyMatching();
        else throw InputError("unknown suite " + name);
        all = all && s.pass;
        rep["suites"].push_back({{"name", s.name}, {"pass", s.pass}, {"checks", s.checks}});
    }
    rep["pass"] = all;
    emit(rep.dump(1) + "\n", fl.out);
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-description lattice vector quantization"};
    app.require_subcommand(1);
    Flags fl;
    uint64_t seed = 0;
    auto addCommon = [&](CLI::App* c) {
        c->add_option("--config", fl.config, "JSON experiment config");
        c->add_option("--seed", seed, "run seed (overrides the config)");
        c->add_option("--workers", fl.workers, "worker threads; never changes output")->check(CLI::Range(1, 1024));
        c->add_option("--out", fl.out, "output path (default stdout)");
    };
    auto* build = app.add_subcommand("build-labeling", "construct and store a labeling function");
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo distortion per erasure pattern");
    auto* ana = app.add_subcommand("analyze", "closed-form tables");
    auto* ver = app.add_subcommand("verify", "run the self-check suites");
    for (auto* c : {build, sim, ana, ver}) addCommon(c);
    std::string which;
    int L = 0;
    ana->add_option("table", which, "fig2 | rateloss | psi-table | product | pradhan | binning-threshold")->required();
    auto* Lopt = ana->add_option("--L", L, "dimension (fig2 and psi-table: largest dimension)");
    std::vector<std::string> suites;
    double perturb = 1.0;
    int64_t oracleSamples = 10'000'000;
    auto* suiteOpt = ver->add_option("--suites", suites, "identities, oracle, matching")->expected(0, -1);
    ver->add_option("--perturb-beta", perturb, "scale the closed-form beta values (fault injection)");
    ver->add_option("--oracle-samples", oracleSamples, "Monte-Carlo samples per dimension")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    for (auto* c : {build, sim, ana, ver})
        if (c->parsed() && c->count("--seed")) fl.seed = seed;
    try {
        if (build->parsed()) return cmdBuildLabeling(fl);
        if (sim->parsed()) return cmdSimulate(fl);
        if (ana->parsed()) return cmdAnalyze(which, fl, Lopt->count() ? std::optional<int>(L) : std::nullopt);
        if (ver->parsed()) return cmdVerify(fl, suites, suiteOpt->count() == 0, perturb, oracleSamples);
    } catch (const IndexBoundError& e) {
        std::cerr << "error: infeasible index bound: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedError& e) {
        std::cerr << "error: unsupported: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
