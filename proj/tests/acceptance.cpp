// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <pace/pace.hpp>

#include "random_models.hpp"

using namespace pace;

namespace {

const std::string dir = PACE_MODELS_DIR;
const Variant variants[] = {Variant::pace, Variant::peace, Variant::space, Variant::apace};
const Sign signs[] = {Sign::absolute, Sign::positive, Sign::negative};
const double degrees[] = {0.0, 0.3, 1.0, 2.0};

Model load(const std::string& name, const Assignment& b = {}) { return pace::bind(load_model(dir + "/" + name + ".sem"), b); }

double effect_value(const EffectEngine& eng, const std::string& x, const std::string& y, double d, Variant v,
                    Sign s = Sign::absolute) {
    return eng.effect({x, y, d, v, s}).value;
}

/// Collects failed checks for one criterion; only the first few are printed.
class Report {
public:
    void near(const std::string& what, double got, double want, double tol) {
        ++checks_;
        if (!(std::fabs(got - want) <= tol)) {
            std::ostringstream o;
            o.precision(15);
            o << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
            failures_.push_back(o.str());
        }
    }
    void expect(const std::string& what, bool ok) {
        ++checks_;
        if (!ok) failures_.push_back(what);
    }
    void fail(const std::string& what) { failures_.push_back(what); }

    bool ok() const { return failures_.empty(); }
    std::size_t checks() const { return checks_; }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::size_t checks_ = 0;
    std::vector<std::string> failures_;
};

std::string witness_text(const std::vector<std::size_t>& idx) {
    std::string s = "(";
    for (std::size_t i = 0; i < idx.size(); ++i) s += (i ? "," : "") + std::to_string(idx[i]);
    return s + ")";
}

void rise_fall(Report& r) {
    EffectEngine eng(load("rise_fall"));
    r.near("PACE_1", effect_value(eng, "X", "Y", 1, Variant::pace), 4.0 / 3.0, 1e-12);
    r.near("PEACE_1", effect_value(eng, "X", "Y", 1, Variant::peace), 41.0 / 36.0, 1e-12);
    r.near("APACE_1", effect_value(eng, "X", "Y", 1, Variant::apace), 59.0 / 36.0, 1e-12);
    r.near("SPACE_1", effect_value(eng, "X", "Y", 1, Variant::space), 1.0, 1e-12);
}

void crossover(Report& r) {
    EffectEngine eng(load("crossover"));
    const std::vector<std::size_t> three{0, 1, 2}, two{0, 2};
    for (auto [d, want] : {std::pair{1.0 / 3.0, three}, std::pair{1.0, two}}) {
        EffectQuery q{"X", "Y", d};
        Chain dp = eng.piv(q, {}), bf = eng.brute_force_piv(q, {});
        r.expect("witness at d=" + std::to_string(d) + " is " + witness_text(dp.indices), dp.indices == want);
        r.expect("brute-force witness at d=" + std::to_string(d), bf.indices == want);
        r.near("PIV vs brute force at d=" + std::to_string(d), dp.value, bf.value, 1e-12);
        r.near("PACE equals chain value at d=" + std::to_string(d), eng.effect(q).value, eng.piev(q, {}, {want}), 1e-12);
    }
    // Value crossover: the longer chain wins at d=1/3, the shorter one at d=1.
    EffectQuery lo{"X", "Y", 1.0 / 3.0}, hi{"X", "Y", 1.0};
    r.expect("(0,1,2) beats (0,2) at d=1/3", eng.piev(lo, {}, {three}) > eng.piev(lo, {}, {two}));
    r.expect("(0,2) beats (0,1,2) at d=1", eng.piev(hi, {}, {two}) > eng.piev(hi, {}, {three}));
}

void bsc(Report& r) {
    Model m = load("bsc");
    EffectEngine eng(m);
    for (double d : {0.0, 0.5, 1.0, 2.0}) r.near("PACE_" + std::to_string(d), effect_value(eng, "X", "Y", d, Variant::pace), 1.0, 1e-9);
    r.near("ACDE", acde(m, "X", 0, 1, "Y", {"Z"}), 0.0, 1e-9);
    r.near("Janzing", janzing_strength(m, {{"X", "Y"}}), 1.0, 1e-9);
    r.near("I(X;Y)", mi_strength(m, "X", "Y"), 0.0, 1e-9);
    r.near("I(X;Y|Z)", cmi_strength(m, "X", "Y"), 1.0, 1e-9);
    for (double y0 : {0.0, 1.0}) {
        Distribution cf = counterfactual_query(m, {{{"X", 0}, {"Y", y0}}, {}}, {{"X", 1}}, "Y");
        r.near("counterfactual Y(1) given y0=" + std::to_string(y0), cf.probability(1.0 - y0), 1.0, 1e-9);
    }
}

void rare_disease(Report& r) {
    for (double p : {0.001, 0.01, 0.1}) {
        Model m = load("rare_disease", {{"p", p}});
        EffectEngine eng(m);
        for (double d : {0.0, 1.0})
            r.near("PACE_" + std::to_string(d) + " at p=" + std::to_string(p), effect_value(eng, "X", "Y", d, Variant::pace),
                   std::pow(4 * p * (1 - p), d), 1e-9);
        r.near("ACDE at p=" + std::to_string(p), acde(m, "X", 0, 1, "Y", {}), 1.0, 1e-9);
        double h = -p * std::log2(p) - (1 - p) * std::log2(1 - p);
        r.near("MI at p=" + std::to_string(p), mi_strength(m, "X", "Y"), h, 1e-9);
    }
}

double closed_form_r(double p, double d) {
    double c = 0.07 + 0.3 * p;
    return 0.6561 * std::pow(5231.6 / 5314.41, d) + 0.0439 * std::pow(4.756 / 19.2721, d) +
           (p > 0.0 ? 0.3 * c * std::pow(0.084 * p / (c * c), d) : 0.0);
}

double closed_form_s(double p, double d) {
    double c = 0.082 + 0.18 * p;
    return 0.4761 * std::pow(267960.0 / 279841.0, d) + 0.0239 * std::pow(97440.0 / 228484.0, d) +
           (p > 0.0 ? 0.5 * c * std::pow(0.05904 * p / (c * c), d) : 0.0);
}

void sprinkler(Report& r) {
    Model s = load("sprinkler_cpt");
    JointTable jt = build_joint(s);
    r.near("P(S=1|R=1)", jt.conditional({"S"}, {{"R", 1}}).probability(1.0), 0.18, 1e-9);
    r.near("P(R=1|S=0)", jt.conditional({"R"}, {{"S", 0}}).probability(1.0), 41.0 / 70.0, 1e-9);
    r.near("ACE(R->W)", ace(s, "R", 0, 1, "W"), 0.653, 1e-9);
    r.near("ACE(S->W)", ace(s, "S", 0, 1, "W"), 0.495, 1e-9);
    r.near("Janzing(R->W)", janzing_strength(s, {{"R", "W"}}, LogBase::nats), 0.351431, 1e-5);
    r.near("Janzing(S->W)", janzing_strength(s, {{"S", "W"}}, LogBase::nats), 0.270828, 1e-5);
    r.near("MI(R,W)", mi_strength(s, "R", "W"), 0.2483275, 1e-5);
    r.near("MI(S,W)", mi_strength(s, "S", "W"), 0.125463, 1e-5);
    r.near("CMI(R,W)", cmi_strength(s, "R", "W"), 0.49359151, 1e-5);
    r.near("CMI(S,W)", cmi_strength(s, "S", "W"), 0.37072701, 1e-5);
    r.near("H(W)", entropy(jt.marginal({"W"})), 0.933262, 1e-5);

    Model form = load_model(dir + "/sprinkler.sem");
    std::mt19937_64 rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        double p = u(rng), d = u(rng);
        EffectEngine eng(pace::bind(form, {{"p", p}}));
        std::string at = " at (p,d)=(" + std::to_string(p) + "," + std::to_string(d) + ")";
        r.near("PACE(R->W)" + at, effect_value(eng, "R", "W", d, Variant::pace), closed_form_r(p, d), 1e-9);
        r.near("PACE(S->W)" + at, effect_value(eng, "S", "W", d, Variant::pace), closed_form_s(p, d), 1e-9);
    }
    for (int i = 0; i <= 20; ++i) {
        double p = i / 20.0;
        EffectEngine eng(pace::bind(form, {{"p", p}}));
        for (int j = 0; j <= 20; ++j) {
            double d = j / 20.0;
            double pr = effect_value(eng, "R", "W", d, Variant::pace), ps = effect_value(eng, "S", "W", d, Variant::pace);
            r.expect("PACE(R->W) > PACE(S->W) at (p,d)=(" + std::to_string(p) + "," + std::to_string(d) + ")", pr > ps);
        }
    }
}

void sprinkler_counterfactual(Report& r) {
    for (double p : {0.0, 0.5, 1.0}) {
        Model m = load("sprinkler", {{"p", p}});
        Distribution cf = counterfactual_query(m, {{{"W", 1}}, {{"R", 0}}}, {{"R", 1}}, "W");
        r.near("P(W(1)=0 | W=1, R=0) at p=" + std::to_string(p), cf.probability(0.0), 0.0439 / (0.3229 - 0.09 * p), 1e-9);
    }
}

void dp_vs_brute_force(Report& r) {
    std::mt19937_64 rng(1);
    for (int t = 0; t < 500; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 10)));
        for (double d : degrees)
            for (Sign s : signs) {
                EffectQuery q{"X", "Y", d, Variant::pace, s};
                for (const auto& st : eng.strata(q)) {
                    Chain a = eng.piv(q, st.z), b = eng.brute_force_piv(q, st.z);
                    r.near("model " + std::to_string(t) + " d=" + std::to_string(d) + " sign=" + to_string(s), a.value, b.value, 1e-9);
                }
            }
    }
}

void inequalities(Report& r) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 300; ++t) {
        auto shape = gen::random_shape(rng, 8);
        if (t % 3 == 0) shape.x_size = 2;
        EffectEngine eng(gen::random_effect_model(rng, shape));
        std::string tag = "model " + std::to_string(t);
        for (double d : degrees)
            for (Sign s : signs) {
                double pace = effect_value(eng, "X", "Y", d, Variant::pace, s), peace = effect_value(eng, "X", "Y", d, Variant::peace, s);
                double space = effect_value(eng, "X", "Y", d, Variant::space, s), apace = effect_value(eng, "X", "Y", d, Variant::apace, s);
                r.expect(tag + ": PEACE <= PACE", peace <= pace + 1e-12);
                r.expect(tag + ": SPACE <= PACE", space <= pace + 1e-12);
                r.expect(tag + ": PACE <= APACE", pace <= apace + 1e-12);
                if (shape.x_size == 2)
                    r.expect(tag + ": binary four-way equality", pace == peace && pace == space && pace == apace);
            }
    }
}

void signed_identities(Report& r) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 8)));
        std::string tag = "model " + std::to_string(t);
        for (double d : degrees) {
            auto v = [&](Variant var, Sign s) { return effect_value(eng, "X", "Y", d, var, s); };
            for (Variant var : {Variant::peace, Variant::apace})
                r.near(tag + ": " + to_string(var) + " decomposition", v(var, Sign::absolute),
                       v(var, Sign::positive) + v(var, Sign::negative), 1e-9);
            double pace = v(Variant::pace, Sign::absolute), pp = v(Variant::pace, Sign::positive), pn = v(Variant::pace, Sign::negative);
            r.expect(tag + ": max signed <= PACE", std::max(pp, pn) <= pace + 1e-9);
            r.expect(tag + ": PACE <= sum signed", pace <= pp + pn + 1e-9);
            for (const auto& st : eng.strata({"X", "Y", d})) {
                double sa = eng.spiv({"X", "Y", d, Variant::space, Sign::absolute}, st.z).value;
                double sp = eng.spiv({"X", "Y", d, Variant::space, Sign::positive}, st.z).value;
                double sn = eng.spiv({"X", "Y", d, Variant::space, Sign::negative}, st.z).value;
                r.near(tag + ": SPIV = max signed SPIV", sa, std::max(sp, sn), 1e-9);
            }
        }
    }
}

void support_restriction(Report& r) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 200; ++t) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(3, 9)(rng);
        std::vector<double> g, p;
        gen::random_stratum(rng, n, g, p, 0.15);
        std::vector<double> rg, rp;
        for (std::size_t i = 0; i < n; ++i)
            if (rg.size() < 2 || std::uniform_int_distribution<int>(0, 2)(rng) > 0) {
                rg.push_back(g[i]);
                rp.push_back(p[i]);
            }
        double d = degrees[t % 4];
        for (Variant v : {Variant::pace, Variant::space, Variant::apace})
            for (Sign s : signs)
                r.expect("trial " + std::to_string(t) + " " + to_string(v) + " " + to_string(s),
                         variation(v, rg, rp, d, s).value <= variation(v, g, p, d, s).value + 1e-12);
    }
    // Restricting the rise-and-fall cause to {1, 3, 4} raises PEACE.
    std::vector<double> g{1, 2, 3, 1}, p{1.0 / 6, 1.0 / 12, 1.0 / 4, 1.0 / 2};
    std::vector<double> rg{1, 3, 1}, rp{1.0 / 6, 1.0 / 4, 1.0 / 2};
    r.near("PEACE on full support", variation(Variant::peace, g, p, 1.0, Sign::absolute).value, 41.0 / 36.0, 1e-12);
    r.near("PEACE on {1,3,4}", variation(Variant::peace, rg, rp, 1.0, Sign::absolute).value, 4.0 / 3.0, 1e-12);
}

void matrix_and_moment(Report& r) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 300; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 8)));
        std::size_t nx = eng.model().variable("X").support.size();
        for (double d : degrees)
            for (Sign s : signs) {
                EffectQuery q{"X", "Y", d, Variant::pace, s};
                for (const auto& st : eng.strata(q)) {
                    Partition part;
                    for (std::size_t i = 0; i < nx; ++i)
                        if (part.indices.size() < 2 || std::uniform_int_distribution<int>(0, 1)(rng)) part.indices.push_back(i);
                    r.near("matrix-form PIEV, model " + std::to_string(t), eng.matrix_form_piev(q, st.z, part), eng.piev(q, st.z, part), 1e-9);
                    r.near("matrix-form aggregate, model " + std::to_string(t), quadratic_form_aggregated(st.g, st.px, d, s),
                           aggregated_variation(st.g, st.px, d, s), 1e-9);
                }
            }
    }
    for (int t = 0; t < 200; ++t) {
        auto shape = gen::random_shape(rng);
        shape.x_size = 2;
        shape.y_size = 2;
        EffectEngine eng(gen::random_effect_model(rng, shape));
        EffectQuery one{"X", "Y", 1.0};
        for (double d : {0.3, 1.0, 2.0, 3.5}) {
            double moment = 0.0;
            for (const auto& st : eng.strata(one)) moment += st.probability * std::pow(eng.piv(one, st.z).value, d);
            r.near("moment, model " + std::to_string(t) + " d=" + std::to_string(d), effect_value(eng, "X", "Y", d, Variant::pace), moment, 1e-9);
        }
    }
}

void estimation(Report& r) {
    std::mt19937_64 rng(61);
    for (int t = 0; t < 60; ++t) {
        Model m = gen::random_effect_model(rng, gen::random_shape(rng, 7));
        EffectEngine eng(m);
        Dataset pop = Dataset::from_joint(eng.joint());
        std::vector<std::string> zs;
        for (const auto& p : m.parents("Y"))
            if (p != "X") zs.push_back(p);
        for (double d : degrees)
            for (Variant v : variants)
                for (Sign s : signs)
                    r.near("plug-in, model " + std::to_string(t), identifiable_effect(pop, "X", "Y", zs, d, v, s, m.variable("X").support.values()),
                           effect_value(eng, "X", "Y", d, v, s), 1e-9);
    }
    EffectEngine eng(load("sprinkler", {{"p", 0.6}}));
    Dataset pop = Dataset::from_joint(eng.joint());
    Dataset ds = sample(eng.joint(), 100000, 99);
    for (const char* x : {"R", "S"}) {
        std::vector<std::string> zs = std::string(x) == "R" ? std::vector<std::string>{"S", "V3"} : std::vector<std::string>{"R", "V3"};
        for (double d : {0.0, 0.5, 1.0})
            for (Variant v : variants) {
                double exact = effect_value(eng, x, "W", d, v);
                std::string tag = std::string(x) + "->W " + to_string(v) + " d=" + std::to_string(d);
                r.near("sprinkler plug-in " + tag, identifiable_effect(pop, x, "W", zs, d, v), exact, 1e-9);
                r.near("sprinkler sample " + tag, identifiable_effect(ds, x, "W", zs, d, v), exact, 0.02);
            }
    }
    Model cpt = load("sprinkler_cpt");
    Dataset obs = sample(build_joint(cpt), 100000, 17);
    r.near("E(W|do(R=1))", interventional_mean(cpt, {{"R", 1}}, "W"), 0.93, 1e-9);
    r.near("IPWE E(W|do(R=1))", ipwe(obs, "R", 1, "W", {"C"}), 0.93, 0.02);
}

void dsl_round_trip(Report& r) {
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 1000; ++t) {
        Model m = gen::random_text_model(rng);
        std::string text = serialize_model(m);
        try {
            Model back = parse_model(text);
            r.expect("round trip " + std::to_string(t), back == m && serialize_model(back) == text);
        } catch (const std::exception& e) {
            r.fail("round trip " + std::to_string(t) + " threw: " + e.what());
        }
    }
    std::vector<std::string> seeds;
    for (const char* f : {"bsc", "sprinkler", "sprinkler_cpt", "rise_fall", "crossover", "chain"}) {
        std::ifstream in(dir + "/" + std::string(f) + ".sem");
        seeds.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    const std::string alphabet = "{}()[],:|=<>+-*/#.0123456789 \nabcXYZpifthenelsevarrootcptdeffunparamin";
    std::mt19937_64 fz(99);
    for (int t = 0; t < 1000; ++t) {
        std::string s = seeds[static_cast<std::size_t>(t) % seeds.size()];
        int edits = std::uniform_int_distribution<int>(1, 6)(fz);
        for (int k = 0; k < edits && !s.empty(); ++k) {
            std::size_t pos = std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(fz);
            char c = alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(fz)];
            switch (std::uniform_int_distribution<int>(0, 3)(fz)) {
            case 0: s[pos] = c; break;
            case 1: s.insert(pos, 1, c); break;
            case 2: s.erase(pos, 1); break;
            default: s.resize(pos); break;
            }
        }
        try {
            Model m = parse_model(s);
            r.expect("fuzz " + std::to_string(t) + " accepted input round trips", parse_model(serialize_model(m)) == m);
        } catch (const ParseError&) {
            r.expect("fuzz " + std::to_string(t), true);
        } catch (const std::exception& e) {
            r.fail("fuzz " + std::to_string(t) + " raised a non-parse error: " + e.what());
        }
    }
}

} // namespace

int main() {
    struct Criterion {
        const char* title;
        std::function<void(Report&)> run;
    };
    const std::vector<Criterion> criteria = {
        {"rise-and-fall example: PACE, PEACE, APACE, SPACE at d=1", rise_fall},
        {"degree-dependent witness crossover", crossover},
        {"binary symmetric channel", bsc},
        {"rare disease", rare_disease},
        {"sprinkler golden values, closed forms and R-over-S ordering", sprinkler},
        {"sprinkler counterfactual", sprinkler_counterfactual},
        {"dynamic program matches brute force on 500 random models", dp_vs_brute_force},
        {"variant ordering and binary coincidence", inequalities},
        {"signed identities", signed_identities},
        {"support restriction and PEACE counterexample", support_restriction},
        {"matrix form and moment property", matrix_and_moment},
        {"estimation consistency", estimation},
        {"DSL round trip and parser fuzz", dsl_round_trip},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Report r;
        auto start = std::chrono::steady_clock::now();
        try {
            criteria[i].run(r);
        } catch (const std::exception& e) {
            r.fail(std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s (%zu checks, %.2fs)\n", r.ok() ? "PASS" : "FAIL", i + 1, criteria[i].title, r.checks(), secs);
        if (!r.ok()) {
            ++failed;
            std::size_t shown = 0;
            for (const auto& f : r.failures()) {
                if (shown++ == 5) {
                    std::printf("       ... %zu more\n", r.failures().size() - 5);
                    break;
                }
                std::printf("       %s\n", f.c_str());
            }
        }
    }
    std::fflush(stdout);
    return failed == 0 ? 0 : 1;
}
