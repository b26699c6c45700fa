#include "codm/query/evaluator.hpp"
#include "codm/query/parser.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "random.hpp"

#include <gtest/gtest.h>

namespace codm::query {
namespace {

using codm::testing::make_geo;
using codm::testing::make_obj;
using codm::testing::make_sales;
using codm::testing::ref;

std::string str(const char* s) { return s; }

std::vector<Value> column(const ResultConcept& r, std::size_t k = 0) {
    std::vector<Value> out;
    for (const auto& row : r.rows) out.push_back(row[k]);
    return out;
}

bool values_equal(const std::vector<Value>& a, const std::vector<Value>& b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end(), same_value);
}

ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::IoError;
}

TEST(Parser, SimpleQueryShape) {
    const auto db = make_obj();
    const auto q = parse_query(R"({c:Objects | c.size.label == "large"} <c.colour.name>)", db.schema());
    EXPECT_EQ(q.sources.size(), 1u);
    EXPECT_EQ(q.sources[0].binder, "c");
    EXPECT_TRUE(q.predicate);
    EXPECT_EQ(q.returns.size(), 1u);
}

TEST(Parser, AnonymousSource) {
    const auto db = make_geo();
    const auto q = parse_query("{Countries}", db.schema());
    ASSERT_EQ(q.sources.size(), 1u);
    EXPECT_TRUE(q.sources[0].binder.empty());
    EXPECT_FALSE(q.predicate);
    EXPECT_TRUE(q.returns.empty());
}

TEST(Parser, SyntaxErrors) {
    const auto db = make_geo();
    EXPECT_EQ(code_of([&] { parse_query("{c:Countries | }", db.schema()); }), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of([&] { parse_query("{c:Countries", db.schema()); }), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of([&] { tokenize("\"open"); }), ErrorCode::SyntaxError);
    EXPECT_EQ(code_of([&] { tokenize("a ` b"); }), ErrorCode::SyntaxError);
}

TEST(Parser, PrintRoundTrip) {
    const auto db = make_sales();
    for (const char* text : {
             "{c:Countries | c.CountryPopulation > 45 AND NOT (c.CountryName == \"France\")}",
             "{s:Sales.country = Countries#1} <s.amount * 2, p = s.product.cat>",
             "{begin {n := 0} over c:Countries where (c.CountryPopulation >= 50) after {n := n + 1} end {} return <n>}",
             "{c:Countries} <c.CountryName, size({Sales.country}), sum({s:Sales.country} <s.amount>)>",
             "{x:{1, 2, 3} | x != 2}",
             "{x:{<1, \"a\">, <2, \"b\">}}",
             "{c:Countries | 1 + ({x:Countries}) < 5}",
         }) {
        const auto q = parse_query(text, db.schema());
        EXPECT_EQ(parse_query(print_query(q, db.schema()), db.schema()), q) << text;
    }
}

TEST(Parser, RandomAstsRoundTrip) {
    codm::testing::Rng rng(11);
    const auto db = make_sales();
    for (int i = 0; i < 100; ++i) {
        const auto q = codm::testing::random_query_ast(rng, db.schema());
        const auto text = print_query(q, db.schema());
        EXPECT_EQ(parse_query(text, db.schema()), q) << text;
    }
}

TEST(Evaluator, FilterOnObjects) {
    const auto db = make_obj();
    const auto r = evaluate_query(db, R"({c:Objects | c.size.label=="large"} <c.colour.name>)");
    EXPECT_TRUE(values_equal(column(r), {str("green"), str("red")}));
}

TEST(Evaluator, WholeExtent) {
    const auto db = make_geo();
    const auto r = evaluate_query(db, "{Countries}");
    EXPECT_TRUE(values_equal(column(r), {ref(db, "Countries", 1), ref(db, "Countries", 2),
                                         ref(db, "Countries", 3)}));
}

TEST(Evaluator, ParentRestriction) {
    const auto db = make_sales();
    const auto r = evaluate_query(db, "{Sales.country = Countries#1}");
    EXPECT_TRUE(values_equal(column(r), {ref(db, "Sales", 1), ref(db, "Sales", 2)}));
    const auto p = evaluate_query(db, "{Sales.country = de}", {{"de", ref(db, "Countries", 1)}});
    EXPECT_TRUE(values_equal(column(p), column(r)));
}

TEST(Evaluator, FormulaReturns) {
    const auto db = make_geo();
    const auto r = evaluate_query(db, "{c:Countries} <c.CountryPopulation + c.CountryPopulation>");
    EXPECT_TRUE(values_equal(column(r), {std::int64_t{160}, std::int64_t{100}, std::int64_t{80}}));
}

TEST(Evaluator, BlockCount) {
    const auto db = make_obj();
    const auto r = evaluate_query(
        db, "{begin {n := 0} over c:Objects where (true) after {n := n + 1} end {} return <n>}");
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_TRUE(same_value(r.rows[0][0], std::int64_t{3}));
}

TEST(Evaluator, BlockBeforeVariable) {
    const auto db = make_geo();
    const auto r = evaluate_query(
        db, "{begin {} over c:Countries before {d := c.CountryPopulation / 10} where (d >= 5) "
            "end {} return <c.CountryName>}");
    EXPECT_TRUE(values_equal(column(r), {str("Germany"), str("France")}));
}

TEST(Evaluator, NullSemantics) {
    auto db = make_obj({.size_nullable = true});
    db.update(ref(db, "Objects", 1), "size", Null{});
    const auto eq = evaluate_query(db, R"({c:Objects | c.size.label == "small"})");
    EXPECT_TRUE(eq.rows.empty());
    const auto ne = evaluate_query(db, R"({c:Objects | c.size.label != "small"})");
    EXPECT_EQ(ne.rows.size(), 2u);
    const auto isnull = evaluate_query(db, "{c:Objects | c.size is null}");
    EXPECT_TRUE(values_equal(column(isnull), {ref(db, "Objects", 1)}));
}

TEST(Evaluator, TypeErrors) {
    const auto db = make_geo();
    EXPECT_EQ(code_of([&] { evaluate_query(db, R"({c:Countries | c.CountryName < 3})"); }),
              ErrorCode::TypeError);
    EXPECT_EQ(code_of([&] { evaluate_query(db, "{c:Countries | c.nope == 1}"); }),
              ErrorCode::UnknownProperty);
    EXPECT_EQ(code_of([&] { evaluate_query(db, "{c:Countries | c.CountryPopulation > limit}"); }),
              ErrorCode::UnknownParameter);
}

TEST(Evaluator, ZigzagMatchesOracle) {
    const auto db = make_sales();
    const auto r = evaluate_query(db, "{c:Countries | size({Sales.country = c}) < 2}");
    const auto countries = db.schema().id_of("Countries");
    const auto expected = oracle::zigzag(db, countries, {}, db.schema().id_of("Sales"),
                                         {"country"}, 2);
    std::vector<Value> ev(expected.begin(), expected.end());
    EXPECT_TRUE(values_equal(column(r), ev));
    EXPECT_EQ(r.rows.size(), 2u);
}

TEST(Evaluator, ProductCount) {
    const auto db = make_sales();
    EXPECT_EQ(evaluate_query(db, "{c:Countries, p:Products}").rows.size(), 6u);
}

TEST(Evaluator, BlockFormAgreesWithSimpleForm) {
    const auto db = make_sales();
    const auto q = parse_query("{s:Sales | s.amount > 6} <s.country.CountryName, s.amount>",
                               db.schema());
    const auto b = to_block_form(q);
    ASSERT_TRUE(b.blocks);
    const auto x = evaluate_query(db, q);
    const auto y = evaluate_query(db, b);
    ASSERT_EQ(x.rows.size(), y.rows.size());
    for (std::size_t i = 0; i < x.rows.size(); ++i) EXPECT_TRUE(values_equal(x.rows[i], y.rows[i]));
}

TEST(Evaluator, RandomPredicatesMatchOracle) {
    codm::testing::Rng rng(3);
    for (int round = 0; round < 50; ++round) {
        const auto db = codm::testing::random_database(rng);
        const auto order = db.schema().topological_order();
        const auto c = order[rng() % order.size()];
        const auto pred = codm::testing::random_predicate(rng, db, c, "x", 2);
        Query q;
        q.sources.push_back(Source{Source::Kind::Path, "x", Expr::make_ident(db.schema().name_of(c))});
        q.predicate = pred;
        const auto r = evaluate_query(db, q);
        const auto expected = oracle::filter(db, c, pred, "x");
        std::vector<Value> ev(expected.begin(), expected.end());
        EXPECT_TRUE(values_equal(column(r), ev)) << print_query(q, db.schema());
    }
}

TEST(Aggregates, Semantics) {
    EXPECT_TRUE(same_value(aggregate_values(AggFn::Sum, {}), std::int64_t{0}));
    EXPECT_TRUE(is_null(aggregate_values(AggFn::Avg, {})));
    EXPECT_TRUE(same_value(aggregate_values(AggFn::Size, {Null{}, std::int64_t{1}}), std::int64_t{2}));
    EXPECT_TRUE(same_value(aggregate_values(AggFn::Max, {std::int64_t{1}, Null{}, std::int64_t{4}}),
                           std::int64_t{4}));
    EXPECT_TRUE(same_value(aggregate_values(AggFn::Avg, {std::int64_t{1}, std::int64_t{2}}), 1.5));
}

} // namespace
} // namespace codm::query
