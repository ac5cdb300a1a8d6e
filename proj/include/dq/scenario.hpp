#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dq/algebroid.hpp"
#include "dq/parser.hpp"
#include "dq/random.hpp"

namespace dq {

/// One executed check: status is pass, fail, or error; failures carry the
/// canonical text form of the first nonzero residual.
struct CheckResult {
    std::string name;
    std::string status;
    std::string residual;
};

struct Report {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    std::map<std::string, long long> timings_ms;  // only filled on request

    bool all_pass() const {
        for (const auto& c : checks)
            if (c.status != "pass") return false;
        return true;
    }
    nlohmann::json to_json(bool with_timings) const {
        nlohmann::json j;
        j["scenario"] = scenario;
        j["seed"] = seed;
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks) {
            nlohmann::json e;
            e["name"] = c.name;
            e["status"] = c.status;
            if (!c.residual.empty()) e["residual"] = c.residual;
            if (with_timings) {
                auto it = timings_ms.find(c.name);
                if (it != timings_ms.end()) e["ms"] = it->second;
            }
            j["checks"].push_back(e);
        }
        return j;
    }
    std::string to_text() const {
        std::string out = "scenario " + scenario + " (seed " + std::to_string(seed) + ")\n";
        for (const auto& c : checks) {
            out += "  [" + c.status + "] " + c.name;
            if (!c.residual.empty()) out += "\n         residual: " + c.residual;
            out += "\n";
        }
        return out;
    }
};

struct RunOptions {
    int hbar_order = -1;    // override scenario value when >= 0
    int degree_bound = -1;  // corrector bounds
    int order_bound = -1;
    int grid = 4;
    std::uint64_t seed = 0;  // override when nonzero
    int jobs = 1;
    std::string only_check;  // run a single named check
    bool timings = false;
};

/// A loaded scenario: named objects plus the list of checks to run.
class Scenario {
public:
    static Scenario load(const nlohmann::json& j, const RunOptions& opt) {
        Scenario sc;
        sc.opt_ = opt;
        sc.name_ = j.value("name", "scenario");
        int m = j.at("dims").value("m", 0);
        int k = j.at("dims").value("k", 0);
        sc.vs_ = VarSet{m, k};
        sc.order_ = opt.hbar_order >= 0 ? opt.hbar_order : j.value("hbar_order", 2);
        sc.seed_ = opt.seed ? opt.seed : j.value("seed", 20240601ULL);
        if (j.contains("domain")) sc.box_ = sc.parse_box(j.at("domain"));
        if (j.contains("objects")) {
            // objects may refer to each other; retry until no progress
            std::vector<std::pair<std::string, nlohmann::json>> pending;
            for (const auto& [name, obj] : j.at("objects").items()) pending.emplace_back(name, obj);
            while (!pending.empty()) {
                std::vector<std::pair<std::string, nlohmann::json>> next;
                std::string last_error;
                for (const auto& [name, obj] : pending) {
                    try {
                        sc.load_object(name, obj);
                    } catch (const std::out_of_range&) {
                        next.emplace_back(name, obj);
                    } catch (const Error& e) {
                        throw Error("object '" + name + "': " + e.what());
                    }
                }
                if (next.size() == pending.size())
                    throw Error("unresolved reference while loading object '" + next.front().first + "'");
                pending = std::move(next);
            }
        }
        if (j.contains("checks"))
            for (const auto& c : j.at("checks")) sc.checks_.push_back(c);
        return sc;
    }

    Report run() const {
        Report rep;
        rep.scenario = name_;
        rep.seed = seed_;
        std::vector<CheckResult> results(checks_.size());
        std::vector<long long> times(checks_.size(), 0);
        std::vector<std::size_t> todo;
        for (std::size_t i = 0; i < checks_.size(); ++i) {
            std::string cname = check_name(checks_[i]);
            if (!opt_.only_check.empty() && cname != opt_.only_check) {
                results[i].name.clear();
                continue;
            }
            todo.push_back(i);
        }
        std::mutex mu;
        std::size_t next = 0;
        auto worker = [&]() {
            while (true) {
                std::size_t mine;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= todo.size()) return;
                    mine = todo[next++];
                }
                auto start = std::chrono::steady_clock::now();
                results[mine] = run_check(checks_[mine]);
                auto stop = std::chrono::steady_clock::now();
                times[mine] =
                    std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
            }
        };
        int jobs = std::max(1, opt_.jobs);
        if (jobs == 1 || todo.size() <= 1) worker();
        else {
            std::vector<std::thread> pool;
            for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].name.empty()) continue;
            rep.checks.push_back(results[i]);
            rep.timings_ms[results[i].name] = times[i];
        }
        std::sort(rep.checks.begin(), rep.checks.end(),
                  [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
        return rep;
    }

private:
    RunOptions opt_;
    std::string name_;
    VarSet vs_;
    int order_ = 2;
    std::uint64_t seed_ = 0;
    Box box_;
    std::vector<nlohmann::json> checks_;

    std::map<std::string, Multivector> multivectors_;
    std::map<std::string, StarProduct> stars_;
    std::map<std::string, TightFamily> families_;
    std::map<std::string, PathB> paths_;
    std::map<std::string, PatchedDisk> disks_;
    std::map<std::string, DiracFrame> frames_;
    std::map<std::string, FoliatedChart> charts_;
    std::map<std::string, CrossSection> sections_;
    std::map<std::string, SectionHomotopy> homotopies_;
    std::map<std::string, HomotopySquare> squares_;
    std::map<std::string, Box> boxes_;

    static std::string check_name(const nlohmann::json& c) {
        return c.value("name", c.value("check", "check"));
    }

    Box parse_box(const nlohmann::json& j) const {
        Box b;
        for (const auto& [var, range] : j.items()) {
            int idx = var_index(var);
            b.ranges[idx] = {Rational::from_string(range.at(0).get<std::string>()),
                             Rational::from_string(range.at(1).get<std::string>())};
        }
        return b;
    }
    int var_index(const std::string& v) const {
        if (v == "t") return vs_.t();
        if (v == "s") return vs_.s();
        if (v == "u") return vs_.u();
        if (v.size() > 1 && v[0] == 'x') return vs_.x(std::stoi(v.substr(1)));
        if (v.size() > 1 && v[0] == 'b') return vs_.b(std::stoi(v.substr(1)));
        throw Error("scenario: unknown variable '" + v + "'");
    }

    Multivector parse_multivector(const nlohmann::json& j, VarSet vs) const {
        Multivector a(vs, order_);
        for (const auto& term : j.at("terms")) {
            WedgeWord w;
            for (int i : term.value("dx", std::vector<int>{})) w.dx.push_back(i);
            for (int i : term.value("db", std::vector<int>{})) w.db.push_back(i);
            a.add_term(w, parse_series(term.at("coeff").get<std::string>(), vs, order_));
        }
        return a;
    }
    PolyDiffOp parse_op(const nlohmann::json& j, VarSet vs, int arity) const {
        PolyDiffOp p(vs, order_, arity);
        for (const auto& term : j.at("terms")) {
            PolyDiffOp::Key key;
            if (term.contains("orders"))
                for (const auto& slot : term.at("orders")) {
                    XMulti mi(vs.m);
                    for (int v = 0; v < vs.m && v < static_cast<int>(slot.size()); ++v)
                        mi.o[static_cast<std::size_t>(v)] = slot.at(static_cast<std::size_t>(v)).get<std::uint16_t>();
                    key.push_back(mi);
                }
            if (static_cast<int>(key.size()) != arity) throw Error("scenario: operator term arity mismatch");
            p.add_term(std::move(key), parse_series(term.at("coeff").get<std::string>(), vs, order_));
        }
        return p;
    }
    std::vector<ScalarExpr> parse_components(const nlohmann::json& j, VarSet vs) const {
        std::vector<ScalarExpr> out;
        for (const auto& c : j) out.push_back(parse_scalar(c.get<std::string>(), vs));
        return out;
    }

    void load_object(const std::string& name, const nlohmann::json& j) {
        std::string type = j.at("type").get<std::string>();
        if (type == "multivector" || type == "sigma") {
            multivectors_.emplace(name, parse_multivector(j, vs_));
        } else if (type == "star_product") {
            const Multivector& pi = multivectors_.at(j.at("bivector").get<std::string>());
            std::string kind = j.value("kind", "moyal");
            stars_.emplace(name, kind == "moyal" ? moyal(pi) : kontsevich2(pi));
        } else if (type == "tight_family") {
            TightFamily t(vs_, order_);
            if (j.contains("tau0_star")) t.tau0 = stars_.at(j.at("tau0_star").get<std::string>()).correction;
            else if (j.contains("tau0")) t.tau0 = parse_op(j.at("tau0"), vs_, 2);
            for (const auto& one : j.value("tau1", nlohmann::json::array()))
                t.tau1.emplace(one.at("db").get<int>(), parse_op(one, vs_, 1));
            for (const auto& two : j.value("tau2", nlohmann::json::array()))
                t.tau2.emplace(std::make_pair(two.at("db").at(0).get<int>(), two.at("db").at(1).get<int>()),
                               PolyDiffOp::function(vs_, order_,
                                                    parse_series(two.at("coeff").get<std::string>(), vs_, order_)));
            t.validate();
            families_.emplace(name, std::move(t));
        } else if (type == "gauge_family") {
            const StarProduct& s = stars_.at(j.at("star").get<std::string>());
            std::map<int, PolyDiffOp> gens;
            for (const auto& one : j.value("generators", nlohmann::json::array()))
                gens.emplace(one.at("db").get<int>(), parse_op(one, vs_, 1));
            families_.emplace(name, gauge_family(s, gens, j.value("tau2_degree", -1)));
        } else if (type == "quantize") {
            const Multivector& sigma = multivectors_.at(j.at("sigma").get<std::string>());
            CorrectorBounds bounds{opt_.degree_bound >= 0 ? opt_.degree_bound : j.value("degree_bound", -1),
                                   opt_.order_bound >= 0 ? opt_.order_bound : j.value("order_bound", -1)};
            families_.emplace(name, quantize_family(HamiltonianFamily::checked(sigma), bounds));
        } else if (type == "path") {
            paths_.emplace(name, PathB(vs_, parse_components(j.at("components"), vs_)));
        } else if (type == "disk") {
            disks_.emplace(name, PatchedDisk::single(vs_, parse_components(j.at("components"), vs_)));
        } else if (type == "dirac_frame") {
            DiracFrame f(vs_);
            for (const auto& sec : j.at("sections")) {
                GenSection g(vs_);
                auto vec = parse_components(sec.at("vec"), vs_);
                auto cov = parse_components(sec.at("cov"), vs_);
                if (static_cast<int>(vec.size()) != g.dirs() || static_cast<int>(cov.size()) != g.dirs())
                    throw Error("scenario: dirac_frame section has wrong dimension");
                g.vec = std::move(vec);
                g.cov = std::move(cov);
                f.sections.push_back(std::move(g));
            }
            f.box = box_;
            frames_.emplace(name, std::move(f));
        } else if (type == "chart") {
            charts_.emplace(name,
                            FoliatedChart::make(multivectors_.at(j.at("sigma").get<std::string>()), box_));
        } else if (type == "section") {
            const FoliatedChart& chart = charts_.at(j.at("chart").get<std::string>());
            sections_.emplace(name, CrossSection::make(chart, parse_components(j.at("phi"), vs_)));
        } else if (type == "homotopy") {
            homotopies_.emplace(name, SectionHomotopy{parse_components(j.at("phi"), vs_)});
        } else if (type == "homotopy_square") {
            squares_.emplace(name, HomotopySquare{parse_components(j.at("phi"), vs_)});
        } else if (type == "box") {
            boxes_.emplace(name, parse_box(j.at("ranges")));
        } else {
            throw Error("scenario: unknown object type '" + type + "'");
        }
    }

    CorrectorBounds bounds_from(const nlohmann::json& c) const {
        return CorrectorBounds{opt_.degree_bound >= 0 ? opt_.degree_bound : c.value("degree_bound", -1),
                               opt_.order_bound >= 0 ? opt_.order_bound : c.value("order_bound", -1)};
    }

    CheckResult run_check(const nlohmann::json& c) const {
        CheckResult r;
        r.name = check_name(c);
        try {
            std::string kind = c.at("check").get<std::string>();
            bool expect_fail = c.value("expect", std::string("pass")) == "fail";
            bool ok = dispatch(kind, c, r);
            if (expect_fail) {
                r.status = ok ? "fail" : "pass";
                if (ok) r.residual = "expected a nonzero residual, got none";
                else r.residual.clear();
            } else {
                r.status = ok ? "pass" : "fail";
            }
        } catch (const std::exception& e) {
            if (c.value("expect", std::string("pass")) == "error") {
                r.status = "pass";
                r.residual.clear();
            } else {
                r.status = "error";
                r.residual = e.what();
            }
            return r;
        }
        if (r.status == "pass") return r;
        if (c.value("expect", std::string("pass")) == "error") {
            r.status = "fail";
            r.residual = "expected an error, check ran to completion";
        }
        return r;
    }

    bool dispatch(const std::string& kind, const nlohmann::json& c, CheckResult& r) const {
        if (kind == "courant-identities") return check_courant(c, r);
        if (kind == "mc") {
            Multivector res = mc_residual(multivectors_.at(c.at("sigma").get<std::string>()));
            if (!res.is_zero()) r.residual = res.to_string();
            return res.is_zero();
        }
        if (kind == "lemma1") {
            Lemma1Report rep = lemma1_equivalence(multivectors_.at(c.at("sigma").get<std::string>()), opt_.grid);
            bool want_solution = c.value("mc", true);
            if (!rep.agree()) { r.residual = "sides disagree: " + rep.detail; return false; }
            if (rep.mc_zero != want_solution) {
                r.residual = want_solution ? "not an MC solution" : "unexpectedly an MC solution";
                return false;
            }
            return true;
        }
        if (kind == "lemma1-random") return check_lemma1_random(c, r);
        if (kind == "lemma2") {
            Lemma2Report rep = lemma2_degree_check(multivectors_.at(c.at("sigma").get<std::string>()));
            if (!rep.ok) r.residual = rep.violation;
            return rep.ok;
        }
        if (kind == "is-dirac") {
            DiracReport rep = is_dirac(frames_.at(c.at("frame").get<std::string>()), opt_.grid);
            if (!rep.ok) r.residual = rep.detail + (rep.residual.empty() ? "" : ": " + rep.residual);
            return rep.ok;
        }
        if (kind == "mc4") {
            Mc4Report rep = mc4_check(families_.at(c.at("family").get<std::string>()));
            for (int e = 0; e < 4; ++e)
                if (!rep.zero[static_cast<std::size_t>(e)]) {
                    r.residual = "equation " + std::to_string(e + 1) + ": " + rep.residual[static_cast<std::size_t>(e)];
                    return false;
                }
            return true;
        }
        if (kind == "quantize") {
            TightFamily t = quantize_family(
                HamiltonianFamily::checked(multivectors_.at(c.at("sigma").get<std::string>())), bounds_from(c));
            Mc4Report rep = mc4_check(t);
            if (!rep.ok()) { r.residual = "returned family fails mc4"; return false; }
            return true;
        }
        if (kind == "star-assoc") return check_star_assoc(c, r);
        if (kind == "star-commutator") return check_star_commutator(c, r);
        if (kind == "transport") return check_transport(c, r);
        if (kind == "holonomy") return check_holonomy(c, r);
        if (kind == "relations") return check_relations(c, r);
        if (kind == "quantize-section") return check_quantize_section(c, r);
        if (kind == "hom-build") return check_hom_build(c, r);
        if (kind == "hom-identify") return check_hom_identify(c, r);
        if (kind == "algebroid-coherence") return check_coherence(c, r);
        if (kind == "restriction") return check_restriction(c, r);
        throw Error("scenario: unknown check '" + kind + "'");
    }

    bool check_courant(const nlohmann::json& c, CheckResult& r) const {
        Rng rng(seed_);
        int count = c.value("count", 100);
        int degree = c.value("degree", 2);
        for (int it = 0; it < count; ++it) {
            GenSection a = rng.section(vs_, degree), b = rng.section(vs_, degree), cc = rng.section(vs_, degree);
            GenSection lhs = courant(a, courant(b, cc));
            GenSection rhs = courant(courant(a, b), cc);
            GenSection cross = courant(b, courant(a, cc));
            for (int d = 0; d < a.dirs(); ++d) {
                ScalarExpr resv = lhs.vec[static_cast<std::size_t>(d)] - rhs.vec[static_cast<std::size_t>(d)] -
                                  cross.vec[static_cast<std::size_t>(d)];
                ScalarExpr resc = lhs.cov[static_cast<std::size_t>(d)] - rhs.cov[static_cast<std::size_t>(d)] -
                                  cross.cov[static_cast<std::size_t>(d)];
                if (!resv.is_zero() || !resc.is_zero()) {
                    r.residual = "leibniz case " + std::to_string(it) + ": " +
                                 (resv.is_zero() ? resc : resv).to_string();
                    return false;
                }
            }
            GenSection self = courant(a, a);
            ScalarExpr half = pairing(a, a).scaled(Rational(1, 2));
            for (int d = 0; d < a.dirs(); ++d) {
                if (!self.vec[static_cast<std::size_t>(d)].is_zero() ||
                    self.cov[static_cast<std::size_t>(d)] != half.derivative(d)) {
                    r.residual = "self-bracket case " + std::to_string(it);
                    return false;
                }
            }
        }
        return true;
    }

    bool check_lemma1_random(const nlohmann::json& c, CheckResult& r) const {
        Rng rng(seed_ + 1);
        int count = c.value("count", 20);
        int nonsolutions = 0;
        for (int it = 0; it < count * 4 && nonsolutions < count; ++it) {
            Multivector sigma(vs_, 0);
            sigma += Multivector::scalar(vs_, 0, series_of(0, rng.scalar(vs_, 0, 1)));
            sigma = Multivector(vs_, 0);
            if (vs_.m >= 2) {
                WedgeWord w{{1, 2}, {}};
                sigma.add_term(w, series_of(0, rng.scalar(vs_, 2, 2)));
            }
            for (int n = 0; n < 2 && vs_.k >= 1; ++n) {
                WedgeWord w{{1 + rng.below(vs_.m)}, {1 + rng.below(vs_.k)}};
                sigma.add_term(w, series_of(0, rng.scalar(vs_, 2, 2)));
            }
            if (vs_.k >= 2) sigma.add_term({{}, {1, 2}}, series_of(0, rng.scalar(vs_, 2, 2)));
            Lemma1Report rep = lemma1_equivalence(sigma, opt_.grid);
            if (!rep.agree()) { r.residual = "case " + std::to_string(it) + ": " + rep.detail; return false; }
            if (!rep.mc_zero) ++nonsolutions;
        }
        if (nonsolutions < count) { r.residual = "generator produced too few non-solutions"; return false; }
        return true;
    }

    std::vector<Series> monomials_upto(VarSet vs, int degree) const {
        std::vector<Series> mons;
        std::vector<int> e(static_cast<std::size_t>(vs.m), 0);
        auto rec = [&](auto&& self, int var, int left) -> void {
            if (var == vs.m) {
                Poly p(vs, Rational(1));
                for (int v = 0; v < vs.m; ++v) p *= Poly::var(vs, v, e[static_cast<std::size_t>(v)]);
                mons.push_back(series_of(order_, ScalarExpr(p)));
                return;
            }
            for (int take = 0; take <= left; ++take) {
                e[static_cast<std::size_t>(var)] = take;
                self(self, var + 1, left - take);
            }
        };
        rec(rec, 0, degree);
        return mons;
    }

    bool check_star_assoc(const nlohmann::json& c, CheckResult& r) const {
        const StarProduct& s = stars_.at(c.at("star").get<std::string>());
        int degree = c.value("degree", 3);
        auto mons = monomials_upto(vs_, degree);
        for (const auto& a : mons)
            for (const auto& b : mons)
                for (const auto& cc : mons) {
                    Series res = s.star(s.star(a, b), cc) - s.star(a, s.star(b, cc));
                    if (!res.is_zero()) {
                        r.residual = "(" + a.to_string() + ", " + b.to_string() + ", " + cc.to_string() +
                                     "): " + res.to_string();
                        return false;
                    }
                }
        if (c.value("operator_level", false) && !assoc_residual_op(s).is_zero()) {
            r.residual = "operator-level residual nonzero";
            return false;
        }
        return true;
    }

    bool check_star_commutator(const nlohmann::json& c, CheckResult& r) const {
        const StarProduct& s = stars_.at(c.at("star").get<std::string>());
        const Multivector& pi = multivectors_.at(c.at("bivector").get<std::string>());
        auto mat = bivector_matrix(pi);
        for (int i = 1; i <= vs_.m; ++i)
            for (int j = 1; j <= vs_.m; ++j) {
                Series xi = series_of(order_, ScalarExpr::var(vs_, vs_.x(i)));
                Series xj = series_of(order_, ScalarExpr::var(vs_, vs_.x(j)));
                Series res = s.commutator(xi, xj) -
                             mat[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
                if (!res.is_zero()) {
                    r.residual = "pair (x" + std::to_string(i) + ", x" + std::to_string(j) + "): " + res.to_string();
                    return false;
                }
            }
        return true;
    }

    bool check_transport(const nlohmann::json& c, CheckResult& r) const {
        const TightFamily& t = families_.at(c.at("family").get<std::string>());
        const PathB& gamma = paths_.at(c.at("path").get<std::string>());
        PolyDiffOp op = transport_op(t, gamma);
        if (c.contains("closed_form")) {
            Series arg = parse_series(c.at("closed_form").at("arg").get<std::string>(), vs_, order_);
            Series want = parse_series(c.at("closed_form").at("value").get<std::string>(), vs_, order_);
            Series got = op.apply({arg});
            if (!(got - want).is_zero()) { r.residual = (got - want).to_string(); return false; }
        }
        // inverse path
        if (!(transport_op(t, gamma.reversed()).compose_at(0, op) == PolyDiffOp::identity(vs_, order_))) {
            r.residual = "inverse path does not invert the transport";
            return false;
        }
        // functoriality under subdivision
        Rational split = Rational::from_string(c.value("split", "1/2"));
        PolyDiffOp first = transport_op(t, gamma.subinterval(Rational(0), split));
        PolyDiffOp second = transport_op(t, gamma.subinterval(split, Rational(1)));
        if (!(second.compose_at(0, first) == op)) {
            r.residual = "subdivision composition differs";
            return false;
        }
        // orientation-preserving reparameterization fixing the endpoints
        ScalarExpr tv = ScalarExpr::var(vs_, vs_.t());
        ScalarExpr phi = tv * tv * (ScalarExpr(vs_, Rational(3)) - tv.scaled(Rational(2)));
        if (!(transport_op(t, gamma.reparam(phi)) == op)) {
            r.residual = "reparameterization changed the transport";
            return false;
        }
        // isomorphism property on listed pairs
        std::vector<std::pair<Series, Series>> pairs;
        for (const auto& pr : c.value("pairs", nlohmann::json::array()))
            pairs.emplace_back(parse_series(pr.at(0).get<std::string>(), vs_, order_),
                               parse_series(pr.at(1).get<std::string>(), vs_, order_));
        IsoCheckReport rep = transport_iso_check(t, gamma, pairs);
        if (!rep.ok) { r.residual = rep.detail; return false; }
        return true;
    }

    bool check_holonomy(const nlohmann::json& c, CheckResult& r) const {
        const TightFamily& t = families_.at(c.at("family").get<std::string>());
        const PatchedDisk& d = disks_.at(c.at("disk").get<std::string>());
        HolonomyElement a = disk_holonomy(t, d);
        if (c.contains("lambda")) {
            Rational want = Rational::from_string(c.at("lambda").get<std::string>());
            if (!(a.lambda == want)) {
                r.residual = "lambda = " + a.lambda.to_string() + ", expected " + want.to_string();
                return false;
            }
        }
        if (c.value("unital_trivial", false) && !(a.unital == series_one(vs_, order_))) {
            r.residual = "unital part " + a.unital.to_string();
            return false;
        }
        return true;
    }

    bool check_relations(const nlohmann::json& c, CheckResult& r) const {
        const TightFamily& t = families_.at(c.at("family").get<std::string>());
        std::vector<Series> funcs;
        for (const auto& f : c.value("functions", nlohmann::json::array()))
            funcs.push_back(parse_series(f.get<std::string>(), vs_, order_));
        if (funcs.empty())
            for (int v = 0; v < vs_.m; ++v) funcs.push_back(series_of(order_, ScalarExpr::var(vs_, v)));
        if (c.contains("disk")) {
            RelationReport rep = relation1_check(t, disks_.at(c.at("disk").get<std::string>()), funcs);
            if (!rep.ok) { r.residual = "relation 1: " + rep.detail; return false; }
            RelationReport nat = relation3_naturality_check(t, disks_.at(c.at("disk").get<std::string>()));
            if (!nat.ok) { r.residual = "naturality: " + nat.detail; return false; }
        }
        if (c.contains("other")) {
            RelationReport rep = relation2_check(t, disks_.at(c.at("disk").get<std::string>()),
                                                 disks_.at(c.at("other").get<std::string>()));
            if (!rep.ok) { r.residual = "relation 2: " + rep.detail; return false; }
        }
        if (c.contains("disk1")) {
            RelationReport rep = relation3_check(t, disks_.at(c.at("disk1").get<std::string>()),
                                                 disks_.at(c.at("disk2").get<std::string>()));
            if (!rep.ok) { r.residual = "relation 3: " + rep.detail; return false; }
        }
        return true;
    }

    bool check_quantize_section(const nlohmann::json& c, CheckResult& r) const {
        const FoliatedChart& chart = charts_.at(c.at("chart").get<std::string>());
        StarProduct s = quantize_section(chart, sections_.at(c.at("section").get<std::string>()), bounds_from(c));
        if (c.contains("equals_star")) {
            VarSet to{vs_.m, 0};
            const StarProduct& want = stars_.at(c.at("equals_star").get<std::string>());
            // compare by application to monomials (charts differ)
            auto mons = monomials_upto(to, 2);
            for (const auto& a : mons)
                for (const auto& b : mons) {
                    Series lhs = s.correction.apply({a, b});
                    Series rhs = detail::rename_series(
                        want.correction.apply({detail::rename_series(a, vs_, identity_map(to, vs_)),
                                               detail::rename_series(b, vs_, identity_map(to, vs_))}),
                        to, identity_map(vs_, to));
                    if (!(lhs - rhs).is_zero()) {
                        r.residual = "fiber product differs on (" + a.to_string() + ", " + b.to_string() + ")";
                        return false;
                    }
                }
        }
        return true;
    }
    static std::vector<int> identity_map(VarSet from, VarSet to) {
        std::vector<int> m(static_cast<std::size_t>(from.nvars()), -1);
        for (int a = 0; a < std::min(from.m, to.m); ++a) m[static_cast<std::size_t>(a)] = a;
        return m;
    }

    bool check_hom_build(const nlohmann::json& c, CheckResult& r) const {
        const FoliatedChart& chart = charts_.at(c.at("chart").get<std::string>());
        const CrossSection& x = sections_.at(c.at("from").get<std::string>());
        const CrossSection& y = sections_.at(c.at("to").get<std::string>());
        const SectionHomotopy& h = homotopies_.at(c.at("homotopy").get<std::string>());
        HomDatum d = hom_build(chart, x, y, h, bounds_from(c), c.value("degree", 2));
        if (c.value("check_inverse", true)) {
            HomDatum back = hom_build(chart, y, x, h.reversed(chart), bounds_from(c), c.value("degree", 2));
            if (!(back.iso.compose_at(0, d.iso) == PolyDiffOp::identity(d.family.vs, d.family.order))) {
                r.residual = "reverse homotopy does not invert the isomorphism";
                return false;
            }
        }
        return true;
    }

    bool check_hom_identify(const nlohmann::json& c, CheckResult& r) const {
        const FoliatedChart& chart = charts_.at(c.at("chart").get<std::string>());
        const SectionHomotopy& h1 = homotopies_.at(c.at("h1").get<std::string>());
        const SectionHomotopy& h2 = homotopies_.at(c.at("h2").get<std::string>());
        HolonomyElement a = hom_identify(chart, h1, h2, squares_.at(c.at("square").get<std::string>()),
                                         bounds_from(c));
        if (c.contains("lambda")) {
            Rational want = Rational::from_string(c.at("lambda").get<std::string>());
            if (!(a.lambda == want)) {
                r.residual = "lambda = " + a.lambda.to_string() + ", expected " + want.to_string();
                return false;
            }
        }
        if (c.contains("square2")) {
            HolonomyElement b = hom_identify(chart, h1, h2, squares_.at(c.at("square2").get<std::string>()),
                                             bounds_from(c));
            if (!(a == b)) {
                r.residual = "fillings disagree: " + a.to_string() + " vs " + b.to_string();
                return false;
            }
        }
        return true;
    }

    bool check_coherence(const nlohmann::json& c, CheckResult& r) const {
        const FoliatedChart& chart = charts_.at(c.at("chart").get<std::string>());
        CoherenceReport rep = homotopy_coherence_check(
            chart, sections_.at(c.at("x").get<std::string>()), sections_.at(c.at("y").get<std::string>()),
            sections_.at(c.at("z").get<std::string>()),
            homotopies_.at(c.at("h12").get<std::string>()), homotopies_.at(c.at("h23").get<std::string>()),
            homotopies_.at(c.at("h13").get<std::string>()), bounds_from(c), c.value("degree", 2));
        if (!rep.ok) { r.residual = rep.detail; return false; }
        return true;
    }

    bool check_restriction(const nlohmann::json& c, CheckResult& r) const {
        const FoliatedChart& chart = charts_.at(c.at("chart").get<std::string>());
        HomDatum d = restriction_hom(chart, boxes_.at(c.at("vbox").get<std::string>()),
                                     boxes_.at(c.at("ubox").get<std::string>()),
                                     sections_.at(c.at("from").get<std::string>()),
                                     sections_.at(c.at("to").get<std::string>()), bounds_from(c));
        if (c.value("expect_identity", false) &&
            !(d.iso == PolyDiffOp::identity(d.family.vs, d.family.order))) {
            r.residual = "expected the identity isomorphism";
            return false;
        }
        return true;
    }
};

inline Report run_scenario_json(const nlohmann::json& j, const RunOptions& opt) {
    return Scenario::load(j, opt).run();
}

}  // namespace dq
