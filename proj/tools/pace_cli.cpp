// pace: evaluate variational causal effects and baselines on .sem models.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <pace/pace.hpp>

namespace {

using json = nlohmann::ordered_json;
using namespace pace;

constexpr int exit_io = 1;
constexpr int exit_query = 2;
constexpr int exit_mismatch = 3;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Real number, optionally written as a fraction a/b.
double parse_real(const std::string& text) {
    auto one = [&](std::string s) {
        s.erase(0, s.find_first_not_of(' '));
        s.erase(s.find_last_not_of(' ') + 1);
        double v = 0.0;
        const char* b = s.data();
        if (!s.empty() && s[0] == '+') ++b;
        auto res = std::from_chars(b, s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw QueryError("'" + text + "' is not a number");
        return v;
    };
    auto slash = text.find('/');
    if (slash == std::string::npos) return one(text);
    double den = one(text.substr(slash + 1));
    if (den == 0.0) throw QueryError("'" + text + "' has a zero denominator");
    return one(text.substr(0, slash)) / den;
}

/// "A=1,B=1/2" -> {A: 1, B: 0.5}
Assignment parse_assignment(const std::string& text) {
    Assignment a;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(' ') == std::string::npos) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw QueryError("expected name=value, got '" + item + "'");
        std::string name = item.substr(0, eq);
        name.erase(0, name.find_first_not_of(' '));
        name.erase(name.find_last_not_of(' ') + 1);
        a[name] = parse_real(item.substr(eq + 1));
    }
    return a;
}

Assignment parse_bindings(const std::vector<std::string>& items) {
    Assignment a;
    for (const auto& it : items)
        for (const auto& [k, v] : parse_assignment(it)) a[k] = v;
    return a;
}

std::vector<std::string> split_names(const std::vector<std::string>& items) {
    std::vector<std::string> out;
    for (const auto& it : items) {
        std::stringstream ss(it);
        std::string n;
        while (std::getline(ss, n, ','))
            if (!n.empty()) out.push_back(n);
    }
    return out;
}

struct Axis {
    std::string name;
    double start = 0.0, stop = 0.0, step = 1.0;

    std::vector<double> points() const {
        std::vector<double> out;
        auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
            double v = start + static_cast<double>(i) * step;
            if (std::fabs(v - stop) < 1e-9 * step) v = stop;
            out.push_back(std::min(v, stop));
        }
        return out;
    }
};

Axis parse_axis(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw QueryError("axis must look like name=start:stop:step, got '" + text + "'");
    Axis a;
    a.name = text.substr(0, eq);
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(eq + 1));
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw QueryError("axis must look like name=start:stop:step, got '" + text + "'");
    a.start = parse_real(parts[0]);
    a.stop = parse_real(parts[1]);
    a.step = parse_real(parts[2]);
    if (!(a.step > 0.0)) throw QueryError("axis '" + a.name + "' needs a positive step");
    if (!(a.start <= a.stop)) throw QueryError("axis '" + a.name + "' has start above stop");
    return a;
}

Model load_bound(const std::string& path, const Assignment& bindings) { return pace::bind(load_model(path), bindings); }

JointOptions env_options() { return joint_options_from_env(); }

json assignment_json(const Assignment& a) {
    json j = json::object();
    for (const auto& [k, v] : a) j[k] = v;
    return j;
}

std::string assignment_text(const Assignment& a) {
    if (a.empty()) return "(all)";
    std::string s;
    for (const auto& [k, v] : a) s += (s.empty() ? "" : ", ") + k + "=" + fmt(v);
    return s;
}

std::string upper(std::string s) {
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

// ---------------------------------------------------------------- eval

struct QueryFlags {
    std::string model;
    std::string cause, outcome;
    std::string degree = "1";
    std::string variant = "pace";
    std::string sign = "abs";
    std::vector<std::string> params;

    void add(CLI::App* cmd) {
        cmd->add_option("model", model, "model file (.sem)")->required();
        cmd->add_option("--cause,-x", cause, "cause variable")->required();
        cmd->add_option("--outcome,-y", outcome, "outcome variable");
        cmd->add_option("--degree,-d", degree, "degree d >= 0 (fractions allowed)");
        cmd->add_option("--variant", variant, "pace | peace | space | apace");
        cmd->add_option("--sign", sign, "abs | positive | negative");
        cmd->add_option("--param,-p", params, "parameter binding name=value (repeatable)");
    }

    EffectQuery query() const {
        return {cause, outcome, parse_real(degree), parse_variant(variant), parse_sign(sign)};
    }
};

int cmd_eval(const QueryFlags& q, const std::string& measure, const std::vector<std::string>& given,
             const std::string& format) {
    Model m = load_bound(q.model, parse_bindings(q.params));
    EffectEngine eng(m, env_options());
    EffectQuery query = q.query();
    if (measure != "effect") {
        double v;
        if (measure == "natural") {
            v = eng.natural_availability(query.cause, split_names(given), query.degree, query.variant, query.sign);
        } else if (measure == "ace") {
            if (query.outcome.empty()) throw QueryError("--outcome is required");
            v = eng.ace_flavored_effect(query.cause, query.outcome, query.degree, query.variant, query.sign);
        } else {
            throw QueryError("unknown measure '" + measure + "' (expected effect, natural or ace)");
        }
        if (format == "json") {
            json j{{"query", {{"cause", query.cause}, {"outcome", query.outcome}, {"measure", measure}}},
                   {"degree", query.degree},
                   {"variant", to_string(query.variant)},
                   {"sign", to_string(query.sign)},
                   {"value", v},
                   {"breakdown", json::array()}};
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << fmt(v) << "\n";
        }
        return 0;
    }
    if (query.outcome.empty()) throw QueryError("--outcome is required");
    EffectReport r = eng.effect(query);
    const auto& xs = m.variable(query.cause).support;
    auto witness_values = [&](const Partition& p) {
        std::vector<double> v;
        for (auto i : p.indices) v.push_back(xs[i]);
        return v;
    };
    if (format == "json") {
        json b = json::array();
        for (const auto& s : r.breakdown) {
            json e{{"z", assignment_json(s.z)}, {"probability", s.probability}, {"variation", s.variation}};
            if (s.witness) e["witness"] = witness_values(*s.witness);
            b.push_back(e);
        }
        json j{{"query", {{"cause", query.cause}, {"outcome", query.outcome}}},
               {"degree", query.degree},
               {"variant", to_string(query.variant)},
               {"sign", to_string(query.sign)},
               {"value", r.value},
               {"breakdown", b}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (format != "text") throw QueryError("unknown format '" + format + "' (expected text or json)");
    std::string label = upper(to_string(query.variant));
    if (query.sign != Sign::absolute) label += query.sign == Sign::positive ? "+" : "-";
    std::cout << label << "_" << fmt(query.degree) << "(" << query.cause << " -> " << query.outcome << ") = " << fmt(r.value)
              << "\n\n";
    std::printf("%-28s %-14s %-14s %s\n", "z", "P(z)", "variation", "witness");
    for (const auto& s : r.breakdown) {
        std::string w;
        if (s.witness) {
            for (double v : witness_values(*s.witness)) w += (w.empty() ? "(" : ", ") + fmt(v);
            w += ")";
        }
        std::printf("%-28s %-14s %-14s %s\n", assignment_text(s.z).c_str(), fmt(s.probability).c_str(),
                    fmt(s.variation).c_str(), w.c_str());
    }
    return 0;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const QueryFlags& q, const std::vector<std::string>& axis_text, const std::string& output) {
    std::vector<Axis> axes;
    for (const auto& t : axis_text) axes.push_back(parse_axis(t));
    if (axes.empty()) throw QueryError("at least one --axis is required");
    if (q.outcome.empty()) throw QueryError("--outcome is required");
    Model base = load_model(q.model);
    Assignment fixed = parse_bindings(q.params);
    for (const auto& a : axes) {
        if (a.name != "d" && !base.parameter(a.name))
            throw QueryError("axis '" + a.name + "' is neither a parameter nor d");
        for (const auto& b : axes)
            if (&a != &b && a.name == b.name) throw QueryError("axis '" + a.name + "' given twice");
    }
    EffectQuery query = q.query();

    std::vector<std::vector<double>> pts;
    std::size_t total = 1;
    for (const auto& a : axes) {
        pts.push_back(a.points());
        total *= pts.back().size();
    }
    auto point = [&](std::size_t flat) {
        std::vector<double> v(axes.size());
        for (std::size_t k = axes.size(); k-- > 0;) {
            v[k] = pts[k][flat % pts[k].size()];
            flat /= pts[k].size();
        }
        return v;
    };

    std::vector<double> values(total);
    std::vector<std::string> errors(total);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < total; i = next++) {
            try {
                auto v = point(i);
                Assignment b = fixed;
                EffectQuery qq = query;
                for (std::size_t k = 0; k < axes.size(); ++k) {
                    if (axes[k].name == "d") qq.degree = v[k];
                    else b[axes[k].name] = v[k];
                }
                values[i] = EffectEngine(pace::bind(base, b), env_options()).effect(qq).value;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    unsigned threads = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), 16u));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (!e.empty()) throw QueryError(e);

    std::ofstream file;
    if (!output.empty() && output != "-") {
        file.open(output);
        if (!file) throw std::ios_base::failure("cannot write '" + output + "'");
    }
    std::ostream& out = file.is_open() ? file : std::cout;
    for (const auto& a : axes) out << a.name << ",";
    out << "value\n";
    for (std::size_t i = 0; i < total; ++i) {
        for (double v : point(i)) out << fmt(v) << ",";
        out << fmt(values[i]) << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------- counterfactual

int cmd_counterfactual(const std::string& path, const std::vector<std::string>& params, const std::string& evidence,
                       const std::string& context, const std::string& action, const std::string& target,
                       const std::string& format) {
    Model m = load_bound(path, parse_bindings(params));
    Evidence ev{parse_assignment(evidence), parse_assignment(context)};
    Distribution d = counterfactual_query(m, ev, parse_assignment(action), target);
    const auto& sup = d.variables()[0].support;
    if (format == "json") {
        json dist = json::array();
        for (std::size_t j = 0; j < sup.size(); ++j) dist.push_back({{"value", sup[j]}, {"probability", d[j]}});
        json j{{"evidence", assignment_json(ev.observed)},
               {"context", assignment_json(ev.context)},
               {"do", assignment_json(parse_assignment(action))},
               {"target", target},
               {"distribution", dist}};
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    for (std::size_t j = 0; j < sup.size(); ++j)
        std::cout << "P(" << target << "=" << fmt(sup[j]) << ") = " << fmt(d[j]) << "\n";
    return 0;
}

// ---------------------------------------------------------------- baselines

int cmd_baselines(const std::string& path, const std::vector<std::string>& params, const std::vector<std::string>& causes_in,
                  const std::string& outcome, const std::string& x0s, const std::string& x1s,
                  const std::vector<std::string>& control_in, const std::vector<std::string>& mediators_in,
                  const std::vector<std::string>& only_in, const std::string& format) {
    Model m = load_bound(path, parse_bindings(params));
    auto causes = split_names(causes_in);
    auto only = split_names(only_in);
    auto wanted = [&](const std::string& k) { return only.empty() || std::find(only.begin(), only.end(), k) != only.end(); };
    std::vector<std::string> rows;
    for (const char* k : {"ace", "acde", "ande", "janzing_bits", "janzing_nats", "mi", "cmi"})
        if (wanted(k) && (std::string(k) != "ande" || !mediators_in.empty() || !only.empty())) rows.push_back(k);
    std::vector<std::vector<std::string>> cells(rows.size());
    json j = json::object();
    for (const auto& x : causes) {
        const auto& xs = m.variable(x).support;
        double x0 = x0s.empty() ? xs[0] : parse_real(x0s);
        double x1 = x1s.empty() ? xs[xs.size() - 1] : parse_real(x1s);
        const auto& ps = m.parents(outcome);
        bool parent = std::find(ps.begin(), ps.end(), x) != ps.end();
        std::vector<std::string> control = split_names(control_in);
        if (control_in.empty())
            for (const auto& p : ps)
                if (p != x) control.push_back(p);
        json col = json::object();
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& k = rows[r];
            std::optional<double> v;
            if (k == "ace") v = ace(m, x, x0, x1, outcome);
            else if (k == "acde") v = acde(m, x, x0, x1, outcome, control);
            else if (k == "ande") v = ande(m, x, x0, x1, outcome, split_names(mediators_in));
            else if (!parent) v = std::nullopt;
            else if (k == "janzing_bits") v = janzing_strength(m, {{x, outcome}}, LogBase::bits);
            else if (k == "janzing_nats") v = janzing_strength(m, {{x, outcome}}, LogBase::nats);
            else if (k == "mi") v = mi_strength(m, x, outcome);
            else if (k == "cmi") v = cmi_strength(m, x, outcome);
            cells[r].push_back(v ? fmt(*v) : "-");
            col[k] = v ? json(*v) : json(nullptr);
        }
        j[x + "->" + outcome] = col;
    }
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::printf("%-14s", "measure");
    for (const auto& x : causes) std::printf(" %-16s", (x + "->" + outcome).c_str());
    std::printf("\n");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::printf("%-14s", rows[r].c_str());
        for (const auto& c : cells[r]) std::printf(" %-16s", c.c_str());
        std::printf("\n");
    }
    return 0;
}

// ---------------------------------------------------------------- estimate

int cmd_estimate(const std::string& csv, const std::string& model_path, const std::string& method, const std::string& cause,
                 const std::string& outcome, const std::vector<std::string>& given, const std::string& covariate,
                 const std::string& c0, const std::string& treated, const std::string& degree, const std::string& variant,
                 const std::string& sign) {
    Dataset ds = read_csv_file(csv);
    // With a model, the chain runs over the declared support of the cause.
    std::vector<double> x_support;
    if (!model_path.empty()) {
        Model m = load_model(model_path);
        ds.check_supports(m);
        if (auto i = m.find(cause)) x_support = m.variable(*i).support.values();
    }
    auto zs = split_names(given);
    double d = parse_real(degree);
    double v;
    if (method == "plugin") {
        if (outcome.empty()) throw QueryError("--outcome is required");
        v = identifiable_effect(ds, cause, outcome, zs, d, parse_variant(variant), parse_sign(sign), x_support);
    } else if (method == "covariate") {
        if (outcome.empty() || covariate.empty() || c0.empty())
            throw QueryError("--outcome, --covariate and --c0 are required");
        v = covariate_weighted_effect(ds, cause, outcome, zs, covariate, parse_real(c0), d, parse_variant(variant),
                                      parse_sign(sign), x_support);
    } else if (method == "natural") {
        v = natural_availability_estimate(ds, cause, zs, d, parse_variant(variant), x_support);
    } else if (method == "ipwe") {
        if (outcome.empty() || treated.empty()) throw QueryError("--outcome and --treated are required");
        v = ipwe(ds, cause, parse_real(treated), outcome, zs);
    } else {
        throw QueryError("unknown method '" + method + "' (expected plugin, covariate, natural or ipwe)");
    }
    std::cout << fmt(v) << "\n";
    return 0;
}

// ---------------------------------------------------------------- check

struct CheckStats {
    double max_dev = 0.0;
    std::size_t comparisons = 0;

    void add(double a, double b) {
        max_dev = std::max(max_dev, std::fabs(a - b));
        ++comparisons;
    }
};

void check_stratum(const Stratum& s, const std::vector<double>& degrees, CheckStats& st) {
    for (double d : degrees) {
        for (Sign sg : {Sign::absolute, Sign::positive, Sign::negative}) {
            Chain dp = chain_variation(s.g, s.px, d, sg);
            if (s.g.size() <= 20) st.add(dp.value, brute_force_chain_variation(s.g, s.px, d, sg).value);
            if (dp.indices.size() >= 2) {
                st.add(easy_variation(s.g, s.px, d, sg, dp.indices), quadratic_form_variation(s.g, s.px, d, sg, dp.indices));
                st.add(dp.value, easy_variation(s.g, s.px, d, sg, dp.indices));
            }
            auto all = full_chain(s.g.size());
            st.add(easy_variation(s.g, s.px, d, sg, all), quadratic_form_variation(s.g, s.px, d, sg, all));
            st.add(aggregated_variation(s.g, s.px, d, sg), quadratic_form_aggregated(s.g, s.px, d, sg));
        }
    }
}

Model random_model(std::size_t nx, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::uniform_int_distribution<int> val(0, 4);
    std::vector<double> xs;
    for (std::size_t i = 0; i < nx; ++i) xs.push_back(static_cast<double>(i));
    Model m;
    m.add_variable({"Z", FiniteSupport{0.0, 1.0, 2.0}});
    m.add_variable({"X", FiniteSupport(xs)});
    m.add_variable({"Y", FiniteSupport{0.0, 1.0, 2.0, 3.0, 4.0}});
    auto row = [&](std::size_t n) {
        std::vector<double> w(n);
        double s = 0.0;
        for (auto& x : w) s += x = u(rng);
        std::vector<Expr> out;
        for (auto x : w) out.push_back(Expr::literal(x / s));
        return out;
    };
    m.set_mechanism("Z", RootMechanism{row(3)});
    CptMechanism cx{{"Z"}, {}};
    for (int z = 0; z < 3; ++z) cx.rows.push_back(row(nx));
    m.set_mechanism("X", cx);
    std::vector<double> table;
    for (std::size_t r = 0; r < nx * 3; ++r) table.push_back(val(rng));
    m.set_mechanism("Y", DeterministicMechanism{{"X", "Z"}, table});
    return pace::bind(m, {});
}

int cmd_check(const std::string& path, const std::vector<std::string>& params, const std::string& cause,
              const std::string& outcome, std::size_t random_support, std::uint64_t seed,
              const std::vector<std::string>& degree_text) {
    std::vector<double> degrees;
    for (const auto& t : split_names(degree_text)) degrees.push_back(parse_real(t));
    if (degrees.empty()) degrees = {0.0, 0.3, 1.0, 2.0};
    Model m;
    EffectQuery q;
    if (random_support > 0) {
        if (random_support < 2 || random_support > 20) throw QueryError("--random-support must be between 2 and 20");
        m = random_model(random_support, seed);
        q = {"X", "Y"};
    } else {
        if (path.empty() || cause.empty() || outcome.empty())
            throw QueryError("a model with --cause and --outcome, or --random-support, is required");
        m = load_bound(path, parse_bindings(params));
        q = {cause, outcome};
    }
    EffectEngine eng(m, env_options());
    CheckStats st;
    for (const auto& s : eng.strata(q)) check_stratum(s, degrees, st);
    if (st.max_dev > 1e-9) {
        std::cout << "MISMATCH, max deviation " << fmt(st.max_dev) << " over " << st.comparisons << " comparisons\n";
        return exit_mismatch;
    }
    if (st.max_dev < 1e-12) std::cout << "OK, max deviation < 1e-12";
    else std::cout << "OK, max deviation " << fmt(st.max_dev);
    std::cout << " (" << st.comparisons << " comparisons)\n";
    return 0;
}

// ---------------------------------------------------------------- sample

int cmd_sample(const std::string& path, const std::vector<std::string>& params, std::size_t n, std::uint64_t seed,
               const std::string& output) {
    Model m = load_bound(path, parse_bindings(params));
    Dataset ds = sample(build_joint(m, env_options()), n, seed);
    if (output.empty() || output == "-") {
        write_csv(std::cout, ds);
        return 0;
    }
    std::ofstream out(output);
    if (!out) throw std::ios_base::failure("cannot write '" + output + "'");
    write_csv(out, ds);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational causal effects on finite structural models"};
    app.require_subcommand(1);

    QueryFlags eval_q;
    std::string eval_format = "text", eval_measure = "effect";
    std::vector<std::string> eval_given;
    auto* eval = app.add_subcommand("eval", "evaluate PACE / PEACE / SPACE / APACE");
    eval_q.add(eval);
    eval->add_option("--format", eval_format, "text | json");
    eval->add_option("--measure", eval_measure, "effect | natural | ace");
    eval->add_option("--given", eval_given, "Z variables for --measure natural");

    QueryFlags sweep_q;
    std::vector<std::string> axes;
    std::string sweep_out;
    auto* sweep = app.add_subcommand("sweep", "evaluate an effect over a grid of parameters and/or degrees");
    sweep_q.add(sweep);
    sweep->add_option("--axis", axes, "name=start:stop:step, name a parameter or d (repeatable)")->required();
    sweep->add_option("--output,-o", sweep_out, "CSV file (default stdout)");

    std::string cf_model, cf_evidence, cf_context, cf_do, cf_target, cf_format = "text";
    std::vector<std::string> cf_params;
    auto* cf = app.add_subcommand("counterfactual", "abduction, action, prediction");
    cf->add_option("model", cf_model, "model file (.sem)")->required();
    cf->add_option("--evidence,-e", cf_evidence, "observed values, e.g. Y=1,X=0")->required();
    cf->add_option("--context", cf_context, "do-assignment active while the evidence was observed");
    cf->add_option("--do", cf_do, "intervention, e.g. X=1")->required();
    cf->add_option("--target,-t", cf_target, "target variable")->required();
    cf->add_option("--param,-p", cf_params, "parameter binding name=value (repeatable)");
    cf->add_option("--format", cf_format, "text | json");

    std::string bl_model, bl_outcome, bl_x0, bl_x1, bl_format = "text";
    std::vector<std::string> bl_params, bl_causes, bl_control, bl_mediators, bl_only;
    auto* bl = app.add_subcommand("baselines", "ACE, ACDE, ANDE, Janzing strength, MI and CMI");
    bl->add_option("model", bl_model, "model file (.sem)")->required();
    bl->add_option("--cause,-x", bl_causes, "cause variable(s)")->required();
    bl->add_option("--outcome,-y", bl_outcome, "outcome variable")->required();
    bl->add_option("--x0", bl_x0, "reference value (default: smallest)");
    bl->add_option("--x1", bl_x1, "treatment value (default: largest)");
    bl->add_option("--control", bl_control, "controlled set for ACDE (default: other parents of the outcome)");
    bl->add_option("--mediators", bl_mediators, "mediators for ANDE");
    bl->add_option("--only", bl_only, "subset of ace,acde,ande,janzing_bits,janzing_nats,mi,cmi");
    bl->add_option("--param,-p", bl_params, "parameter binding name=value (repeatable)");
    bl->add_option("--format", bl_format, "text | json");

    std::string es_csv, es_model, es_method = "plugin", es_cause, es_outcome, es_cov, es_c0, es_treated;
    std::string es_degree = "1", es_variant = "pace", es_sign = "abs";
    std::vector<std::string> es_given;
    auto* es = app.add_subcommand("estimate", "estimate effects from a CSV dataset");
    es->add_option("data", es_csv, "CSV file with a header row")->required();
    es->add_option("--model", es_model, "model whose supports the data must respect");
    es->add_option("--method", es_method, "plugin | covariate | natural | ipwe");
    es->add_option("--cause,-x", es_cause, "cause (treatment for ipwe)")->required();
    es->add_option("--outcome,-y", es_outcome, "outcome");
    es->add_option("--given,-z", es_given, "Z variables (covariates for ipwe)");
    es->add_option("--covariate", es_cov, "covariate C for --method covariate");
    es->add_option("--c0", es_c0, "covariate value whose cells give the outcome differences");
    es->add_option("--treated", es_treated, "treatment value s for ipwe");
    es->add_option("--degree,-d", es_degree, "degree d >= 0");
    es->add_option("--variant", es_variant, "pace | peace | space | apace");
    es->add_option("--sign", es_sign, "abs | positive | negative");

    std::string ck_model, ck_cause, ck_outcome;
    std::vector<std::string> ck_params, ck_degrees;
    std::size_t ck_random = 0;
    std::uint64_t ck_seed = 1;
    auto* ck = app.add_subcommand("check", "compare the chain recursion and matrix forms against direct enumeration");
    ck->add_option("model", ck_model, "model file (.sem)");
    ck->add_option("--cause,-x", ck_cause, "cause variable");
    ck->add_option("--outcome,-y", ck_outcome, "outcome variable");
    ck->add_option("--param,-p", ck_params, "parameter binding name=value (repeatable)");
    ck->add_option("--degrees", ck_degrees, "degrees to test (default 0,0.3,1,2)");
    ck->add_option("--random-support", ck_random, "check a random model whose cause has this many values");
    ck->add_option("--seed", ck_seed, "seed for --random-support");

    std::string sm_model, sm_out;
    std::vector<std::string> sm_params;
    std::size_t sm_n = 1000;
    std::uint64_t sm_seed = 1;
    auto* sm = app.add_subcommand("sample", "draw a CSV dataset from a model");
    sm->add_option("model", sm_model, "model file (.sem)")->required();
    sm->add_option("-n", sm_n, "number of records");
    sm->add_option("--seed", sm_seed, "random seed");
    sm->add_option("--param,-p", sm_params, "parameter binding name=value (repeatable)");
    sm->add_option("--output,-o", sm_out, "CSV file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_io;
    }

    try {
        if (*eval) return cmd_eval(eval_q, eval_measure, eval_given, eval_format);
        if (*sweep) return cmd_sweep(sweep_q, axes, sweep_out);
        if (*cf) return cmd_counterfactual(cf_model, cf_params, cf_evidence, cf_context, cf_do, cf_target, cf_format);
        if (*bl)
            return cmd_baselines(bl_model, bl_params, bl_causes, bl_outcome, bl_x0, bl_x1, bl_control, bl_mediators, bl_only,
                                 bl_format);
        if (*es)
            return cmd_estimate(es_csv, es_model, es_method, es_cause, es_outcome, es_given, es_cov, es_c0, es_treated,
                                es_degree, es_variant, es_sign);
        if (*ck) return cmd_check(ck_model, ck_params, ck_cause, ck_outcome, ck_random, ck_seed, ck_degrees);
        if (*sm) return cmd_sample(sm_model, sm_params, sm_n, sm_seed, sm_out);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_query;
    }
    return 0;
}
