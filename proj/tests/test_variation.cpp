#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <pace/pace.hpp>

#include "random_models.hpp"

using namespace pace;

namespace {

const std::string dir = PACE_MODELS_DIR;
const double degrees[] = {0.0, 0.3, 1.0, 2.0};
const Sign signs[] = {Sign::absolute, Sign::positive, Sign::negative};

Model load(const std::string& name, const Assignment& b = {}) { return pace::bind(load_model(dir + "/" + name + ".sem"), b); }

EffectQuery query(double d, Variant v = Variant::pace, Sign s = Sign::absolute) { return {"X", "Y", d, v, s}; }

double value(const EffectEngine& eng, double d, Variant v, Sign s = Sign::absolute) {
    return eng.effect(query(d, v, s)).value;
}

} // namespace

TEST(Weight, Examples) {
    for (double d : {0.0, 0.5, 1.0, 3.0}) EXPECT_DOUBLE_EQ(weight(0.5, 0.5, d), 1.0);
    EXPECT_EQ(weight(0.0, 0.4, 0.0), 0.0);
    EXPECT_EQ(weight(0.4, 0.0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(weight(0.1, 0.9, 1.0), 4 * 0.1 * 0.9);
    EXPECT_DOUBLE_EQ(weight(0.2, 0.3, 0.0), 1.0);
}

TEST(GIn, Examples) {
    EXPECT_DOUBLE_EQ(g_in(load("bsc"), "Y", {{"X", 1}, {"Z", 0}}), 1.0);
    Model s = load("sprinkler", {{"p", 0.5}});
    for (double v3 : {0.0, 1.0}) EXPECT_DOUBLE_EQ(g_in(s, "W", {{"R", 1}, {"S", 1}, {"V3", v3}}), 1.0);
    EXPECT_DOUBLE_EQ(g_in(load("rise_fall"), "Y", {{"X", 4}}), 1.0);
    EXPECT_THROW(g_in(load("bsc"), "Y", {{"X", 1}}), QueryError);
}

TEST(RiseFall, Variations) {
    EffectEngine eng(load("rise_fall"));
    auto q = query(1.0);
    EXPECT_NEAR(eng.piev(q, {}, {{0, 1, 2, 3}}), 41.0 / 36.0, 1e-12);
    EXPECT_NEAR(eng.piev(query(1.0, Variant::pace, Sign::negative), {}, {{2, 3}}), 1.0, 1e-12);
    Chain c = eng.piv(q, {});
    EXPECT_NEAR(c.value, 4.0 / 3.0, 1e-12);
    EXPECT_EQ(c.indices, (std::vector<std::size_t>{0, 2, 3}));
    Chain b = eng.brute_force_piv(q, {});
    EXPECT_NEAR(b.value, 4.0 / 3.0, 1e-12);
    EXPECT_EQ(b.indices, c.indices);
    EXPECT_NEAR(eng.spiv(q, {}).value, 1.0, 1e-12);
    EXPECT_NEAR(eng.apiv(q, {}), 59.0 / 36.0, 1e-12);
    EXPECT_NEAR(value(eng, 1, Variant::peace), 41.0 / 36.0, 1e-12);
}

TEST(RiseFall, MatrixForm) {
    EffectEngine eng(load("rise_fall"));
    EXPECT_NEAR(eng.matrix_form_piev(query(1.0), {}, {{0, 1, 2, 3}}, false), 41.0 / 144.0, 1e-12);
    EXPECT_NEAR(eng.matrix_form_piev(query(1.0), {}, {{0, 1, 2, 3}}), 41.0 / 36.0, 1e-12);
}

TEST(Crossover, WitnessDependsOnDegree) {
    EffectEngine eng(load("crossover"));
    Chain a = eng.piv(query(1.0 / 3.0), {});
    EXPECT_EQ(a.indices, (std::vector<std::size_t>{0, 1, 2}));
    Chain b = eng.piv(query(1.0), {});
    EXPECT_EQ(b.indices, (std::vector<std::size_t>{0, 2}));
    EXPECT_EQ(eng.brute_force_piv(query(1.0 / 3.0), {}).indices, a.indices);
    EXPECT_EQ(eng.brute_force_piv(query(1.0), {}).indices, b.indices);
}

TEST(Piv, TwoPointSupportEqualsPair) {
    std::vector<double> g{0, 3}, p{0.2, 0.8};
    for (double d : degrees) {
        Chain c = chain_variation(g, p, d, Sign::absolute);
        EXPECT_DOUBLE_EQ(c.value, easy_variation(g, p, d, Sign::absolute, {0, 1}));
        EXPECT_DOUBLE_EQ(c.value, pair_variation(g, p, d, Sign::absolute).value);
        EXPECT_DOUBLE_EQ(c.value, aggregated_variation(g, p, d, Sign::absolute));
    }
}

TEST(Piv, ConstantOutcomeIsZero) {
    std::vector<double> g{2, 2, 2, 2}, p{0.1, 0.2, 0.3, 0.4};
    for (Variant v : {Variant::pace, Variant::peace, Variant::space, Variant::apace})
        EXPECT_EQ(variation(v, g, p, 1.0, Sign::absolute).value, 0.0);
}

TEST(Effect, Bsc) {
    EffectEngine eng(load("bsc"));
    for (double d : {0.0, 0.5, 1.0, 2.0}) EXPECT_NEAR(value(eng, d, Variant::pace), 1.0, 1e-12);
    auto grid = eng.pace_vector(query(0), {0.0, 0.5, 1.0});
    for (double v : grid) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Effect, RareDisease) {
    for (double p : {0.001, 0.01, 0.1, 0.5}) {
        EffectEngine eng(load("rare_disease", {{"p", p}}));
        for (double d : {0.0, 0.5, 1.0}) EXPECT_NEAR(value(eng, d, Variant::pace), std::pow(4 * p * (1 - p), d), 1e-12);
    }
    EffectEngine eng(load("rare_disease", {{"p", 0.1}}));
    auto v = eng.pace_vector(query(0), {0.0, 1.0});
    EXPECT_NEAR(v[0], 1.0, 1e-12);
    EXPECT_NEAR(v[1], 0.36, 1e-12);
    EXPECT_EQ(eng.pace_vector(query(0), {0.0}).size(), 1u);
    EXPECT_THROW(eng.pace_vector(query(0), {1.0, 0.5}), QueryError);
}

TEST(Effect, SprinklerAtZero) {
    EffectEngine eng(load("sprinkler", {{"p", 0.0}}));
    EXPECT_NEAR(eng.effect({"R", "W", 1.0}).value, 0.6561 * 5231.6 / 5314.41 + 0.0439 * 4.756 / 19.2721, 1e-9);
}

TEST(Effect, BreakdownSumsToValue) {
    EffectEngine eng(load("sprinkler", {{"p", 0.4}}));
    for (Variant v : {Variant::pace, Variant::peace, Variant::space, Variant::apace}) {
        EffectReport r = eng.effect({"S", "W", 0.7, v});
        double s = 0.0;
        for (const auto& b : r.breakdown) {
            EXPECT_GT(b.probability, 0.0);
            EXPECT_EQ(b.witness.has_value(), v == Variant::pace || v == Variant::space);
            s += b.probability * b.variation;
        }
        EXPECT_NEAR(s, r.value, 1e-9);
    }
}

TEST(Effect, QueryErrors) {
    EffectEngine spr(load("sprinkler_cpt"));
    EXPECT_THROW(spr.effect({"R", "W", 1.0}), QueryError);
    EffectEngine bsc(load("bsc"));
    EXPECT_THROW(bsc.effect({"Y", "X", 1.0}), QueryError);
    EXPECT_THROW(bsc.effect({"X", "Y", -1.0}), QueryError);
    EXPECT_THROW(bsc.effect({"Q", "Y", 1.0}), QueryError);
    Model m = parse_model("var Z in {0,1}\nvar X in {0,1}\nvar Y in {0,1}\nroot Z {0: 1, 1: 0}\n"
                          "root X {0: 0.5, 1: 0.5}\ndef Y = X * Z\n");
    EXPECT_THROW(EffectEngine(m).piv({"X", "Y", 1.0}, {{"Z", 1}}), ZeroProbabilityError);
    EXPECT_EQ(EffectEngine(m).effect({"X", "Y", 1.0}).breakdown.size(), 1u);
}

TEST(MatrixForm, EdgeCases) {
    std::vector<double> g{1, 4, 2}, zero{0, 0, 0};
    EXPECT_EQ(quadratic_form_variation(g, zero, 1.0, Sign::absolute, {0, 1, 2}), 0.0);
    std::vector<double> p{0.2, 0.5, 0.3};
    EXPECT_NEAR(quadratic_form_variation(g, p, 0.5, Sign::absolute, {0, 2}, false), 1.0 * std::pow(0.2 * 0.3, 0.5), 1e-15);
}

TEST(NaturalAvailability, Examples) {
    for (double p : {0.1, 0.3}) {
        Model m = load("rare_disease", {{"p", p}});
        for (Variant v : {Variant::pace, Variant::peace, Variant::space, Variant::apace})
            for (double d : {0.0, 1.0, 2.0})
                EXPECT_NEAR(natural_availability(m, "X", {}, d, v), std::pow(4 * p * (1 - p), d), 1e-12);
    }
    Model chain = load("chain");
    EXPECT_NEAR(natural_availability(chain, "X", {"W"}, 1.0, Variant::pace), 0.0, 1e-15);
    Model one = parse_model("var X in {5}\nroot X {5: 1}\n");
    EXPECT_EQ(natural_availability(one, "X", {}, 1.0, Variant::pace), 0.0);
}

TEST(AceFlavored, Examples) {
    EXPECT_NEAR(ace_flavored_effect(load("bsc"), "X", "Y", 1.0, Variant::pace, Sign::absolute), 0.0, 1e-15);
    Model c = parse_model("var X in {0,1,2}\nvar Y in {4}\nroot X {0: 0.2, 1: 0.3, 2: 0.5}\ndef Y | X = 4\n");
    EXPECT_EQ(ace_flavored_effect(c, "X", "Y", 1.0, Variant::apace, Sign::absolute), 0.0);
    Model s = load("sprinkler_cpt");
    for (double d : {0.0, 0.5, 1.0})
        for (Variant v : {Variant::pace, Variant::peace, Variant::space, Variant::apace})
            EXPECT_NEAR(ace_flavored_effect(s, "S", "W", d, v, Sign::absolute), 0.495 * std::pow(4 * 0.3 * 0.7, d), 1e-12);
}

TEST(DegreeGrid, Spacing) {
    auto g = degree_grid(4, 2.0);
    EXPECT_EQ(g, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
}

// Randomized properties. Each test draws its own models so failures are reproducible in isolation.

TEST(Property, DynamicProgramMatchesBruteForce) {
    std::mt19937_64 rng(1);
    std::size_t compared = 0;
    for (int t = 0; t < 500; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 10)));
        double d = degrees[t % 4];
        for (Sign s : signs) {
            auto q = query(d, Variant::pace, s);
            for (const auto& st : eng.strata(q)) {
                Chain a = eng.piv(q, st.z), b = eng.brute_force_piv(q, st.z);
                ASSERT_NEAR(a.value, b.value, 1e-9);
                EXPECT_EQ(a.indices, b.indices);
                ++compared;
            }
        }
    }
    EXPECT_GT(compared, 1500u);
}

TEST(Property, OrderingInequalities) {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 300; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 8)));
        for (double d : degrees) {
            double pace = value(eng, d, Variant::pace), peace = value(eng, d, Variant::peace);
            double space = value(eng, d, Variant::space), apace = value(eng, d, Variant::apace);
            EXPECT_LE(peace, pace + 1e-12);
            EXPECT_LE(space, pace + 1e-12);
            EXPECT_LE(pace, apace + 1e-12);
        }
    }
}

TEST(Property, BinaryCoincidence) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        auto shape = gen::random_shape(rng);
        shape.x_size = 2;
        EffectEngine eng(gen::random_effect_model(rng, shape));
        for (double d : degrees)
            for (Sign s : signs) {
                double pace = value(eng, d, Variant::pace, s);
                EXPECT_EQ(pace, value(eng, d, Variant::peace, s));
                EXPECT_EQ(pace, value(eng, d, Variant::space, s));
                EXPECT_EQ(pace, value(eng, d, Variant::apace, s));
            }
    }
}

TEST(Property, SignedIdentities) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 200; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 8)));
        for (double d : degrees) {
            auto v = [&](Variant var, Sign s) { return value(eng, d, var, s); };
            EXPECT_NEAR(v(Variant::peace, Sign::absolute), v(Variant::peace, Sign::positive) + v(Variant::peace, Sign::negative), 1e-9);
            EXPECT_NEAR(v(Variant::apace, Sign::absolute), v(Variant::apace, Sign::positive) + v(Variant::apace, Sign::negative), 1e-9);
            double pace = v(Variant::pace, Sign::absolute), pp = v(Variant::pace, Sign::positive), pn = v(Variant::pace, Sign::negative);
            EXPECT_LE(std::max(pp, pn), pace + 1e-9);
            EXPECT_LE(pace, pp + pn + 1e-9);
            auto q = query(d);
            for (const auto& st : eng.strata(q)) {
                double sa = eng.spiv(query(d, Variant::space, Sign::absolute), st.z).value;
                double sp = eng.spiv(query(d, Variant::space, Sign::positive), st.z).value;
                double sn = eng.spiv(query(d, Variant::space, Sign::negative), st.z).value;
                EXPECT_NEAR(sa, std::max(sp, sn), 1e-9);
            }
        }
    }
}

TEST(Property, SupportRestrictionNeverIncreases) {
    // Removing values of X keeps the remaining values' probabilities.
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
            for (Sign s : signs) EXPECT_LE(variation(v, rg, rp, d, s).value, variation(v, g, p, d, s).value + 1e-12);
    }
}

TEST(Property, PeaceCounterexampleUnderRestriction) {
    std::vector<double> g{1, 2, 3, 1}, p{1.0 / 6, 1.0 / 12, 1.0 / 4, 1.0 / 2};
    std::vector<double> rg{1, 3, 1}, rp{1.0 / 6, 1.0 / 4, 1.0 / 2};
    EXPECT_NEAR(variation(Variant::peace, g, p, 1.0, Sign::absolute).value, 41.0 / 36.0, 1e-12);
    EXPECT_NEAR(variation(Variant::peace, rg, rp, 1.0, Sign::absolute).value, 4.0 / 3.0, 1e-12);
}

TEST(Property, MatrixFormEquivalence) {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 300; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 8)));
        std::size_t nx = eng.model().variable("X").support.size();
        for (double d : degrees)
            for (Sign s : signs) {
                auto q = query(d, Variant::pace, s);
                for (const auto& st : eng.strata(q)) {
                    Partition part;
                    for (std::size_t i = 0; i < nx; ++i)
                        if (part.indices.size() < 2 || std::uniform_int_distribution<int>(0, 1)(rng))
                            part.indices.push_back(i);
                    EXPECT_NEAR(eng.matrix_form_piev(q, st.z, part), eng.piev(q, st.z, part), 1e-9);
                    EXPECT_NEAR(quadratic_form_aggregated(st.g, st.px, d, s), aggregated_variation(st.g, st.px, d, s), 1e-9);
                }
            }
    }
}

TEST(Property, MomentOfBinaryOutcome) {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        auto shape = gen::random_shape(rng);
        shape.x_size = 2;
        shape.y_size = 2;
        EffectEngine eng(gen::random_effect_model(rng, shape));
        for (double d : {0.3, 1.0, 2.0, 3.5}) {
            double moment = 0.0;
            for (const auto& st : eng.strata(query(1.0))) moment += st.probability * std::pow(eng.piv(query(1.0), st.z).value, d);
            EXPECT_NEAR(value(eng, d, Variant::pace), moment, 1e-9);
        }
    }
}

TEST(Property, BoundedByUnweightedVariation) {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 500; ++t) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(2, 10)(rng);
        std::vector<double> g, p;
        gen::random_stratum(rng, n, g, p, 0.1);
        double iv = 0.0;
        for (std::size_t i = 1; i < n; ++i) iv += std::fabs(g[i] - g[i - 1]);
        for (double d : {0.0, 0.3, 1.0, 2.0, 5.0}) EXPECT_LE(chain_variation(g, p, d, Sign::absolute).value, iv + 1e-12);
    }
}

TEST(Property, ZeroSignedVariationIffMonotone) {
    std::mt19937_64 rng(9);
    int zeros = 0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
        std::vector<double> g, p;
        gen::random_stratum(rng, n, g, p, 0.3);
        for (auto& x : g) x = std::fabs(x) < 2 ? 0.0 : x;  // more ties and monotone cases
        bool non_increasing = true, non_decreasing = true;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                if (!(p[i] > 0 && p[j] > 0)) continue;
                if (g[j] > g[i]) non_increasing = false;
                if (g[j] < g[i]) non_decreasing = false;
            }
        for (double d : degrees) {
            EXPECT_EQ(chain_variation(g, p, d, Sign::positive).value == 0.0, non_increasing);
            EXPECT_EQ(chain_variation(g, p, d, Sign::negative).value == 0.0, non_decreasing);
        }
        zeros += non_increasing;
    }
    EXPECT_GT(zeros, 50);
}

TEST(Property, MonotonicityInDegreeIsReported) {
    // Not guaranteed for weights below one: report how often PACE grows with d.
    std::mt19937_64 rng(10);
    int increasing = 0, total = 0;
    for (int t = 0; t < 100; ++t) {
        EffectEngine eng(gen::random_effect_model(rng, gen::random_shape(rng, 6)));
        auto v = eng.pace_vector(query(0), {0.0, 0.3, 1.0, 2.0});
        for (std::size_t k = 1; k < v.size(); ++k) {
            ++total;
            increasing += v[k] >= v[k - 1] - 1e-12;
        }
    }
    RecordProperty("nondecreasing_steps", increasing);
    RecordProperty("steps", total);
    std::printf("PACE nondecreasing in d on %d of %d grid steps\n", increasing, total);
    EffectEngine rare(load("rare_disease", {{"p", 0.1}}));
    EXPECT_LT(value(rare, 1.0, Variant::pace), value(rare, 0.0, Variant::pace));
}
