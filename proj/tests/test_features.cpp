#include "doctest.h"
#include "helpers.hpp"

#include "cspsel/features.hpp"
#include "cspsel/synth.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace cspsel;
using namespace testing;

namespace {

void check_summary(const Summary6& s, std::array<double, 6> expected) {
    CHECK(s.min == doctest::Approx(expected[0]));
    CHECK(s.q1 == doctest::Approx(expected[1]));
    CHECK(s.median == doctest::Approx(expected[2]));
    CHECK(s.q3 == doctest::Approx(expected[3]));
    CHECK(s.max == doctest::Approx(expected[4]));
    CHECK(s.mean == doctest::Approx(expected[5]));
}

// x1*x2 = x3 and x4*x5 = x6 as two identical ternary tables over 1..4.
Instance product_example() {
    std::vector<Tuple> tuples;
    for (Value a = 1; a <= 4; ++a)
        for (Value b = 1; b <= 4; ++b)
            if (a * b <= 4) tuples.push_back({a, b, a * b});
    std::vector<Variable> vars;
    for (int i = 1; i <= 6; ++i) vars.push_back(var("x" + std::to_string(i), range(1, 4)));
    return make_instance(vars, {Constraint::extension({0, 1, 2}, true, tuples),
                                Constraint::extension({3, 4, 5}, true, tuples)});
}

} // namespace

TEST_CASE("canonical name lists") {
    CHECK(feature_names(FeatureSet::full).size() == 37);
    CHECK(feature_names(FeatureSet::cheap).size() == 29);
    const auto cheap = feature_names(FeatureSet::cheap);
    CHECK(std::find(cheap.begin(), cheap.end(), "edge_density") != cheap.end());
    for (auto excluded : kCheapExcluded) {
        CHECK(std::find(cheap.begin(), cheap.end(), excluded) == cheap.end());
    }
    CHECK(parse_feature_set("cheap") == FeatureSet::cheap);
    CHECK_THROWS_AS(parse_feature_set("medium"), Error);
}

TEST_CASE("summary6 interpolates quartiles") {
    const std::vector<double> four{4, 2, 3, 1};
    check_summary(summary6(four), {1, 1.75, 2.5, 3.25, 4, 2.5});
    const std::vector<double> one{5};
    check_summary(summary6(one), {5, 5, 5, 5, 5, 5});
    const Summary6 empty = summary6({});
    check_summary(empty, {0, 0, 0, 0, 0, 0});
    CHECK(empty.degenerate);
}

TEST_CASE("domain and arity statistics") {
    const Instance two = make_instance({var("x", {0, 1}), var("y", range(0, 3))}, {});
    const Summary6 d = domain_features(two);
    CHECK(d.min == 2);
    CHECK(d.max == 4);
    CHECK(d.mean == 3);
    const Instance sizes = make_instance({var("a", {0}), var("b", {0, 1}), var("c", range(0, 2)), var("d", range(0, 3))}, {});
    check_summary(domain_features(sizes), {1, 1.75, 2.5, 3.25, 4, 2.5});

    const Instance tern = make_instance({var("x", {0, 1, 2}), var("y", {0, 1, 2}), var("z", {0, 1, 2})},
                                        {Constraint::alldifferent({0, 1, 2})});
    check_summary(arity_features(tern), {3, 3, 3, 3, 3, 3});
    const Instance bins = make_instance({var("x", {0, 1}), var("y", {0, 1}), var("z", {0, 1})},
                                        {Constraint::relation(0, RelOp::lt, 1), Constraint::relation(1, RelOp::lt, 2)});
    check_summary(arity_features(bins), {1, 1, 1, 1, 1, 1});
    const Instance mixed = make_instance({var("x", {0, 1}), var("y", {0, 1}), var("z", {0, 1})},
                                         {Constraint::relation(0, RelOp::lt, 1), Constraint::alldifferent({0, 1, 2})});
    CHECK(arity_features(mixed).mean == 1.25);
    CHECK(arity_features(make_instance({var("x", {0})}, {})).degenerate);
}

TEST_CASE("shared variables and constraints per variable") {
    const auto d = range(0, 3);
    const Instance shared = make_instance({var("x", d), var("y", d), var("z", d), var("w", d)},
                                          {Constraint::alldifferent({0, 1, 2}), Constraint::alldifferent({0, 1, 3})});
    CHECK(multiple_shared_variables(shared) == 1.0);
    const Instance chain = make_instance({var("x", d), var("y", d), var("z", d)},
                                         {Constraint::relation(0, RelOp::lt, 1), Constraint::relation(1, RelOp::lt, 2)});
    CHECK(multiple_shared_variables(chain) == 0.0);
    CHECK(mean_constraints_per_variable(chain) == doctest::Approx(2.0 / 3));
    const Instance single = make_instance({var("x", d), var("y", d), var("z", d)}, {Constraint::alldifferent({0, 1, 2})});
    CHECK(multiple_shared_variables(single) == 0.0);
    CHECK(mean_constraints_per_variable(single) == 1.0);
    const Instance idle = make_instance({var("x", d), var("y", d), var("z", d), var("w", d)},
                                        {Constraint::alldifferent({0, 1, 2})});
    CHECK(mean_constraints_per_variable(idle) == 0.75);
    CHECK(mean_constraints_per_variable(make_instance({var("x", d)}, {})) == 0.0);
}

TEST_CASE("auxiliary ratio") {
    const auto d = range(0, 1);
    std::vector<Variable> vars{var("a", d, true), var("b", d, true), var("c", d), var("e", d), var("f", d), var("g", d)};
    CHECK(aux_ratio(make_instance(vars, {})) == 0.5);
    CHECK(aux_ratio(make_instance({var("a", d)}, {})) == 0.0);
    std::vector<std::string> diag;
    CHECK(aux_ratio(make_instance({var("a", d, true)}, {}), &diag) == 0.0);
    CHECK(diag.size() == 1);
}

TEST_CASE("tightness by enumeration") {
    const Instance ad = make_instance({var("x", {0, 1}), var("y", {0, 1})}, {Constraint::alldifferent({0, 1})});
    CHECK(constraint_tightness(ad, ad.constraints[0], 1, 1000) == 0.5);

    std::vector<Tuple> all;
    for (Value a = 0; a < 3; ++a)
        for (Value b = 0; b < 3; ++b) all.push_back({a, b});
    const Instance ext = make_instance({var("x", range(0, 2)), var("y", range(0, 2))},
                                       {Constraint::extension({0, 1}, true, all)});
    CHECK(tightness_features(ext, 1).max == 0.0);

    const Instance lt = make_instance({var("x", range(0, 9)), var("y", range(0, 9))},
                                      {Constraint::relation(0, RelOp::lt, 1)});
    CHECK(constraint_tightness(lt, lt.constraints[0], 1, 1000) == 0.55);
    CHECK(exact_tightness(lt, lt.constraints[0]) == 0.55);
}

TEST_CASE("sampled tightness converges to the exact value") {
    // x < y over 0..39: exact tightness 820/1600, product 1600 > 1000 forces sampling.
    const Instance lt = make_instance({var("x", range(0, 39)), var("y", range(0, 39))},
                                      {Constraint::relation(0, RelOp::lt, 1)});
    const double exact = exact_tightness(lt, lt.constraints[0]);
    CHECK(exact == doctest::Approx(820.0 / 1600));
    int within = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        if (std::abs(constraint_tightness(lt, lt.constraints[0], seed, 1000) - exact) <= 0.05) ++within;
    }
    CHECK(within >= 190);
    CHECK(constraint_tightness(lt, lt.constraints[0], 7, 1000) == constraint_tightness(lt, lt.constraints[0], 7, 1000));
}

TEST_CASE("symmetry proportion worked example") {
    const Instance inst = product_example();
    const auto classes = symmetry_classes(inst);
    std::map<std::size_t, std::set<std::size_t>> parts;
    for (std::size_t v = 0; v < classes.size(); ++v) parts[classes[v]].insert(v);
    std::multiset<std::size_t> sizes;
    for (const auto& [c, members] : parts) sizes.insert(members.size());
    CHECK(sizes == std::multiset<std::size_t>{4, 2});
    CHECK(classes[0] == classes[1]);
    CHECK(classes[0] == classes[3]);
    CHECK(classes[2] == classes[5]);
    CHECK(symmetry_proportion(inst) == doctest::Approx(7.0 / 15));
}

TEST_CASE("symmetry proportion degenerate cases") {
    const auto d = range(0, 2);
    CHECK(symmetry_proportion(make_instance({var("a", d), var("b", d), var("c", d)}, {})) == 1.0);
    CHECK(symmetry_proportion(make_instance({var("a", {0, 1}), var("b", d)}, {})) == 0.0);
    CHECK(symmetry_proportion(make_instance({var("a", d, true), var("b", d)}, {})) == 0.0);
    CHECK(symmetry_proportion(make_instance({var("a", d)}, {})) == 0.0);
    // x < y tells the two apart; x != y does not.
    CHECK(symmetry_proportion(make_instance({var("a", d), var("b", d)}, {Constraint::relation(0, RelOp::lt, 1)})) == 0.0);
    CHECK(symmetry_proportion(make_instance({var("a", d), var("b", d)}, {Constraint::relation(0, RelOp::ne, 1)})) == 1.0);
}

TEST_CASE("equivalent spellings of a relation look alike") {
    const auto d = range(0, 3);
    // a < b and c > d (that is d < c) make a~d and b~c.
    const Instance inst = make_instance({var("a", d), var("b", d), var("c", d), var("d", d)},
                                        {Constraint::relation(0, RelOp::lt, 1), Constraint::relation(2, RelOp::gt, 3)});
    const auto classes = symmetry_classes(inst);
    CHECK(classes[0] == classes[3]);
    CHECK(classes[1] == classes[2]);
    CHECK(classes[0] != classes[1]);
}

TEST_CASE("alldifferent statistics") {
    const Instance same = make_instance({var("x", {1, 2, 3}), var("y", {1, 2, 3}), var("z", {1, 2, 3})},
                                        {Constraint::alldifferent({0, 1, 2})});
    CHECK(alldiff_features(same).mean == 1.0);
    const Instance apart = make_instance({var("x", {0, 1}), var("y", {2, 3})}, {Constraint::alldifferent({0, 1})});
    CHECK(alldiff_features(apart).mean == 2.0);
    const Instance none = make_instance({var("x", {0, 1}), var("y", {2, 3})}, {Constraint::relation(0, RelOp::lt, 1)});
    CHECK(alldiff_features(none).degenerate);
    CHECK(alldiff_features(none).max == 0.0);
}

TEST_CASE("extracted vectors have the right shape and ranges") {
    SynthSpec spec;
    spec.count = 30;
    spec.seed = 4;
    for (const auto& si : synth_generate(spec).instances) {
        for (auto set : {FeatureSet::full, FeatureSet::cheap}) {
            const FeatureVector fv = extract(si.instance, set, 1);
            REQUIRE(fv.values.size() == feature_names(set).size());
            for (std::size_t i = 0; i < fv.values.size(); ++i) {
                CHECK(std::isfinite(fv.values[i]));
                if (is_unit_interval_feature(fv.names()[i])) {
                    CHECK(fv.values[i] >= 0.0);
                    CHECK(fv.values[i] <= 1.0);
                }
            }
            CHECK(fv.values == extract(si.instance, set, 1).values);
        }
        // Cheap values equal the matching full values.
        const FeatureVector full = extract(si.instance, FeatureSet::full, 1);
        const FeatureVector cheap = extract(si.instance, FeatureSet::cheap, 1);
        for (auto name : feature_names(FeatureSet::cheap)) CHECK(cheap.at(name) == full.at(name));
    }
}

TEST_CASE("features ignore names, declaration order and constraint order") {
    SynthSpec spec;
    spec.count = 20;
    spec.seed = 12;
    Rng rng(99);
    for (const auto& si : synth_generate(spec).instances) {
        const Instance& a = si.instance;
        const std::size_t n = a.variables.size();
        std::vector<std::size_t> perm(n); // old index -> new index
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_index(rng, i)]);

        Instance b;
        b.name = a.name;
        b.variables.resize(n);
        for (std::size_t v = 0; v < n; ++v) {
            b.variables[perm[v]] = a.variables[v];
            b.variables[perm[v]].name = "renamed" + std::to_string(v);
        }
        for (const auto& c : a.constraints) {
            Constraint m = c;
            for (auto& v : m.scope) v = perm[v];
            b.constraints.push_back(m);
        }
        for (std::size_t i = b.constraints.size(); i > 1; --i) {
            std::swap(b.constraints[i - 1], b.constraints[uniform_index(rng, i)]);
        }
        for (auto v : a.ordering) b.ordering.push_back(perm[v]);
        validate(b);

        const auto fa = extract(a, FeatureSet::full, 3);
        const auto fb = extract(b, FeatureSet::full, 3);
        for (std::size_t i = 0; i < fa.values.size(); ++i) {
            CHECK_MESSAGE(fa.values[i] == doctest::Approx(fb.values[i]).epsilon(1e-12), fa.names()[i]);
        }
    }
}

TEST_CASE("features csv round trip") {
    SynthSpec spec;
    spec.count = 5;
    std::vector<FeatureVector> full, cheap;
    for (const auto& si : synth_generate(spec).instances) {
        full.push_back(extract(si.instance, FeatureSet::full, 1));
        cheap.push_back(extract(si.instance, FeatureSet::cheap, 1));
    }
    for (const auto* set : {&full, &cheap}) {
        const std::string text = write_features_csv(*set);
        const auto back = parse_features_csv(text);
        REQUIRE(back.size() == set->size());
        for (std::size_t i = 0; i < back.size(); ++i) {
            CHECK(back[i].instance == (*set)[i].instance);
            CHECK(back[i].set == (*set)[i].set);
            CHECK(back[i].values == (*set)[i].values);
            CHECK(back[i].extract_seconds == (*set)[i].extract_seconds);
        }
        CHECK(write_features_csv(back) == text);
    }
    CHECK(write_features_csv(full).rfind("instance,edge_density,clustering,deg_min", 0) == 0);
    CHECK_THROWS_AS(parse_features_csv("instance,foo\nx,1\n"), ParseError);
    CHECK_THROWS_AS(parse_features_csv(write_features_csv(full).substr(0, 600) + "\n"), ParseError);
}
