#include "codm/analytics/cube.hpp"
#include "codm/analytics/group.hpp"
#include "codm/analytics/hierarchy.hpp"
#include "codm/analytics/inference.hpp"
#include "codm/query/parser.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

namespace codm::analytics {
namespace {

using codm::testing::make_obj;
using codm::testing::make_sales;
using codm::testing::ref;

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

CubeSpec sales_cube(const Database& db) {
    CubeSpec spec;
    spec.fact = db.schema().id_of("Sales");
    spec.axes.push_back(make_axis(db, spec.fact, {"country"}));
    spec.axes.push_back(make_axis(db, spec.fact, {"product"}));
    spec.measure = query::parse_expr("t.amount", db.schema());
    spec.agg = query::AggFn::Sum;
    return spec;
}

TEST(Cube, SalesByCountryAndProduct) {
    const auto db = make_sales();
    const auto cells = build_cube(db, sales_cube(db));
    ASSERT_EQ(cells.size(), 6u);
    const std::vector<std::optional<std::int64_t>> expected{10, 5, 7, {}, {}, {}};
    for (std::size_t i = 0; i < 6; ++i) {
        if (expected[i]) {
            ASSERT_TRUE(cells[i].value);
            EXPECT_TRUE(same_value(*cells[i].value, *expected[i]));
        } else {
            EXPECT_FALSE(cells[i].value);
        }
    }
    EXPECT_EQ(cells[0].coords, (std::vector<ItemRef>{ref(db, "Countries", 1), ref(db, "Products", 1)}));
}

TEST(Cube, SingleAxisSize) {
    const auto db = make_sales();
    CubeSpec spec;
    spec.fact = db.schema().id_of("Sales");
    spec.axes.push_back(make_axis(db, spec.fact, {"country"}));
    spec.agg = query::AggFn::Size;
    const auto cells = build_cube(db, spec);
    ASSERT_EQ(cells.size(), 3u);
    EXPECT_TRUE(same_value(*cells[0].value, std::int64_t{2}));
    EXPECT_TRUE(same_value(*cells[1].value, std::int64_t{1}));
    EXPECT_TRUE(same_value(*cells[2].value, std::int64_t{0}));
}

TEST(Cube, MatchesQueryFormAndOracle) {
    const auto db = make_sales();
    const auto spec = sales_cube(db);
    const auto cells = build_cube(db, spec);
    const auto r = query::evaluate_query(db, cube_query_text(db, spec));
    ASSERT_EQ(r.rows.size(), cells.size());
    const auto o = oracle::cube(db, spec.fact, {{spec.axes[0].concept_id, {"country"}},
                                                {spec.axes[1].concept_id, {"product"}}},
                                {"amount"}, query::AggFn::Sum);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        EXPECT_TRUE(same_value(r.rows[i][0], cells[i].coords[0]));
        EXPECT_TRUE(same_value(r.rows[i][2], cells[i].value ? *cells[i].value : Value{std::int64_t{0}}));
        EXPECT_EQ(o[i].coords, cells[i].coords);
        EXPECT_EQ(o[i].value.has_value(), cells[i].value.has_value());
    }
}

TEST(Cube, InvalidAxis) {
    const auto db = make_sales();
    EXPECT_EQ(code_of([&] { make_axis(db, db.schema().id_of("Sales"), {"nope"}); }),
              ErrorCode::InvalidAxisPath);
    EXPECT_EQ(code_of([&] { make_axis(db, db.schema().id_of("Sales"), {"amount"}); }),
              ErrorCode::InvalidAxisPath);
}

Database counties() {
    Database db;
    db.define_concept({"Countries", {{"CountryName", "String"}}});
    db.define_concept({"States", {{"name", "String"}, {"country", "Countries"}}});
    db.define_concept({"Counties", {{"name", "String"}, {"state", "States"}, {"pop", "Integer"}}});
    const auto de = db.insert("Countries", {std::string("DE")});
    const auto fr = db.insert("Countries", {std::string("FR")});
    const auto by = db.insert("States", {std::string("BY"), de});
    const auto nw = db.insert("States", {std::string("NW"), de});
    const auto br = db.insert("States", {std::string("BR"), fr});
    db.insert("Counties", {std::string("a"), by, std::int64_t{3}});
    db.insert("Counties", {std::string("b"), nw, std::int64_t{4}});
    db.insert("Counties", {std::string("c"), br, std::int64_t{5}});
    db.insert("Counties", {std::string("d"), by, std::int64_t{6}});
    return db;
}

TEST(Cube, RollUpAndDrillDown) {
    const auto db = counties();
    CubeSpec spec;
    spec.fact = db.schema().id_of("Counties");
    spec.axes.push_back(make_axis(db, spec.fact, {"state"}));
    spec.measure = query::parse_expr("t.pop", db.schema());
    const auto up = change_level(db, spec, 0, LevelChange::roll_up, "country");
    EXPECT_EQ(up.axes[0].concept_id, db.schema().id_of("Countries"));
    EXPECT_EQ(db.schema().path_name(up.axes[0].path), "state.country");
    const auto fine = build_cube(db, spec);
    const auto coarse = build_cube(db, up);
    // re-aggregate the state cells per country
    std::map<ItemRef, std::int64_t> sums;
    for (const auto& c : fine) {
        const auto country = std::get<ItemRef>(db.store().values(c.coords[0])[1]);
        sums[country] += c.value ? std::get<std::int64_t>(*c.value) : 0;
    }
    for (const auto& c : coarse) EXPECT_EQ(std::get<std::int64_t>(*c.value), sums[c.coords[0]]);
    const auto down = change_level(db, up, 0, LevelChange::drill_down, "country");
    EXPECT_EQ(down.axes[0].concept_id, db.schema().id_of("States"));
    EXPECT_EQ(code_of([&] { change_level(db, spec, 0, LevelChange::roll_up, "nope"); }),
              ErrorCode::NoSuchLevel);
}

TEST(Inference, ObjectsBySize) {
    const auto db = make_obj();
    const auto sizes = db.schema().id_of("Sizes");
    const auto colors = db.schema().id_of("Colors");
    EXPECT_EQ(infer(db, {{sizes, {ref(db, "Sizes", 1)}}}, colors),
              std::vector<ItemRef>{ref(db, "Colors", 2)});
    EXPECT_EQ(infer(db, {{sizes, {ref(db, "Sizes", 2)}}}, colors),
              (std::vector<ItemRef>{ref(db, "Colors", 1), ref(db, "Colors", 2)}));
    EXPECT_EQ(inference_facts(db, {{sizes, {}}}, colors),
              std::vector<ConceptId>{db.schema().id_of("Objects")});
}

TEST(Inference, NoCommonSubconcept) {
    Database db;
    db.define_concept({"A", {{"x", "Integer"}}});
    db.define_concept({"B", {{"y", "Integer"}}});
    const auto a = db.insert("A", {std::int64_t{1}});
    EXPECT_EQ(code_of([&] { infer(db, {{db.schema().id_of("A"), {a}}}, db.schema().id_of("B")); }),
              ErrorCode::NoCommonSubconcept);
}

TEST(Group, SalesPerCountry) {
    const auto db = make_sales();
    const auto r = group_aggregate(db, db.schema().id_of("Countries"), "Sales.country",
                                   query::parse_expr("amount", db.schema()), query::AggFn::Sum);
    ASSERT_EQ(r.rows.size(), 3u);
    EXPECT_TRUE(same_value(r.rows[0][1], std::int64_t{15}));
    EXPECT_TRUE(same_value(r.rows[1][1], std::int64_t{7}));
    EXPECT_TRUE(same_value(r.rows[2][1], std::int64_t{0}));
}

TEST(Group, ObjectsPerSize) {
    const auto db = make_obj();
    const auto r = group_aggregate(db, db.schema().id_of("Sizes"), "Objects.size", std::nullopt,
                                   query::AggFn::Size);
    ASSERT_EQ(r.rows.size(), 2u);
    EXPECT_TRUE(same_value(r.rows[0][1], std::int64_t{1}));
    EXPECT_TRUE(same_value(r.rows[1][1], std::int64_t{2}));
}

TEST(Hierarchy, CountriesAndSales) {
    const auto db = make_sales();
    TreeSpec spec{{{db.schema().id_of("Countries"), "", {}, {}},
                   {db.schema().id_of("Sales"), "country", {}, {}}}};
    EXPECT_EQ(expansion_rule(db, spec, 1), Expansion::subitems);
    const auto root = hierarchy_tree(db, spec);
    ASSERT_EQ(root.children.size(), 3u);
    ASSERT_EQ(root.children[0].children.size(), 2u);
    EXPECT_EQ(*root.children[0].children[0].item, ref(db, "Sales", 1));
    EXPECT_EQ(*root.children[0].children[1].item, ref(db, "Sales", 2));
    EXPECT_TRUE(root.children[2].children.empty());
    EXPECT_EQ(hierarchy_tree(db, spec, 1).children[0].children.size(), 0u);
}

TEST(Hierarchy, Zigzag) {
    const auto db = make_sales();
    TreeSpec spec{{{db.schema().id_of("Products"), "", {}, {}},
                   {db.schema().id_of("Sales"), "product", {}, {}},
                   {db.schema().id_of("Countries"), "country", {"CountryName"}, {}}}};
    EXPECT_EQ(expansion_rule(db, spec, 2), Expansion::superitem);
    const auto root = hierarchy_tree(db, spec);
    const auto& food = root.children[0];
    ASSERT_EQ(food.children.size(), 2u);
    EXPECT_EQ(*food.children[0].item, ref(db, "Sales", 1));
    EXPECT_EQ(*food.children[1].item, ref(db, "Sales", 3));
    EXPECT_EQ(*food.children[0].children[0].item, ref(db, "Countries", 1));
    EXPECT_EQ(*food.children[1].children[0].item, ref(db, "Countries", 2));
    const auto text = dump_tree(db, root);
    EXPECT_NE(text.find("Countries#1(Germany) [CountryName=Germany]"), std::string::npos) << text;
}

TEST(Hierarchy, FilterAndInvalidSpec) {
    const auto db = make_sales();
    TreeSpec spec{{{db.schema().id_of("Countries"), "",
                    {}, query::parse_expr("CountryPopulation > 45", db.schema())}}};
    EXPECT_EQ(hierarchy_tree(db, spec).children.size(), 2u);
    TreeSpec bad{{{db.schema().id_of("Countries"), "", {}, {}},
                  {db.schema().id_of("Products"), "nope", {}, {}}}};
    EXPECT_EQ(code_of([&] { expansion_rule(db, bad, 1); }), ErrorCode::InvalidTreeSpec);
}

} // namespace
} // namespace codm::analytics
