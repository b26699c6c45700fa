#include "codm/schema.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

namespace codm {
namespace {

using testing::make_obj;
using testing::make_sales;

std::vector<std::string> names(const Schema& s, const std::vector<ConceptId>& ids) {
    std::vector<std::string> out;
    for (auto c : ids) out.push_back(s.name_of(c));
    return out;
}

std::vector<std::string> path_names(const Schema& s, const std::vector<DimPath>& paths) {
    std::vector<std::string> out;
    for (const auto& p : paths) out.push_back(s.path_name(p));
    return out;
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

TEST(Schema, PrimitivesArePredefined) {
    Schema s;
    EXPECT_EQ(s.id_of("String"), kString);
    EXPECT_EQ(s.id_of("Integer"), kInteger);
    EXPECT_EQ(s.id_of("Real"), kReal);
    EXPECT_EQ(s.id_of("Boolean"), kBoolean);
    EXPECT_TRUE(s.topological_order().empty());
    EXPECT_TRUE(s.validate().empty());
}

TEST(Schema, DefineObjectsHasTwoDimensions) {
    Schema s;
    s.define_concept("Sizes", {{"label", "String"}});
    s.define_concept("Colors", {{"name", "String"}});
    const auto objects = s.define_concept("Objects", {{"size", "Sizes"}, {"colour", "Colors"}});
    EXPECT_GE(objects.value, kFirstUserConcept);
    EXPECT_EQ(s.get(objects).dimensionality(), 2u);
}

TEST(Schema, DefinitionErrors) {
    Schema s;
    s.define_concept("A", {{"x", "String"}});
    EXPECT_EQ(code_of([&] { s.define_concept("Empty", {}); }), ErrorCode::InvalidDefinition);
    EXPECT_EQ(code_of([&] { s.define_concept("A", {{"y", "String"}}); }), ErrorCode::DuplicateName);
    EXPECT_EQ(code_of([&] { s.define_concept("B", {{"y", "Nope"}}); }), ErrorCode::UnknownDomain);
}

TEST(Schema, MutualReferenceIsACycle) {
    Schema s;
    const auto err = code_of([&] {
        s.define_concepts({{"B", {{"y", "A"}}}, {"A", {{"x", "B"}}}});
    });
    EXPECT_EQ(err, ErrorCode::CycleDetected);
    EXPECT_FALSE(s.find("A"));
    EXPECT_FALSE(s.find("B"));
}

TEST(Schema, DirectSelfDimensionIsAllowed) {
    Schema s;
    DimSpec manager{"manager", "Persons", true, true};
    s.define_concept("Persons", {{"name", "String"}, manager});
    EXPECT_TRUE(s.validate().empty());
    const auto persons = s.id_of("Persons");
    EXPECT_EQ(path_names(s, s.canonical_syntax(persons)), std::vector<std::string>{"name"});
}

TEST(Schema, Neighbors) {
    const auto db = make_obj();
    const auto& s = db.schema();
    EXPECT_EQ(names(s, s.neighbors(s.id_of("Objects"), Direction::super)),
              (std::vector<std::string>{"Sizes", "Colors"}));
    EXPECT_EQ(names(s, s.neighbors(s.id_of("Sizes"), Direction::sub)),
              std::vector<std::string>{"Objects"});
    EXPECT_EQ(names(s, s.bottom_parents()), std::vector<std::string>{"Objects"});
}

TEST(Schema, EnumeratePaths) {
    const auto db = make_obj();
    const auto& s = db.schema();
    EXPECT_EQ(path_names(s, s.enumerate_paths(s.id_of("Objects"), kString)),
              (std::vector<std::string>{"size.label", "colour.name"}));
    EXPECT_EQ(s.enumerate_paths(s.id_of("Objects"), s.id_of("Objects")).front().rank(), 0u);
    EXPECT_TRUE(s.enumerate_paths(s.id_of("Sizes"), s.id_of("Colors")).empty());
}

TEST(Schema, CanonicalSyntax) {
    const auto db = make_obj();
    const auto& s = db.schema();
    EXPECT_EQ(path_names(s, s.canonical_syntax(s.id_of("Objects"))),
              (std::vector<std::string>{"colour.name", "size.label"}));
}

TEST(Schema, BottomCanonicalSyntaxOnSales) {
    const auto db = make_sales();
    const auto& s = db.schema();
    const auto bottom = path_names(s, s.canonical_syntax(kBottom));
    EXPECT_EQ(bottom, (std::vector<std::string>{"Sales.amount", "Sales.country.CountryName",
                                                "Sales.country.CountryPopulation",
                                                "Sales.product.cat"}));
}

TEST(Schema, ReachesAndTopologicalOrder) {
    const auto db = make_sales();
    const auto& s = db.schema();
    EXPECT_TRUE(s.reaches(s.id_of("Sales"), s.id_of("Countries")));
    EXPECT_TRUE(s.reaches(s.id_of("Sales"), kInteger));
    EXPECT_FALSE(s.reaches(s.id_of("Countries"), s.id_of("Sales")));
    EXPECT_FALSE(s.reaches(s.id_of("Sales"), s.id_of("Sales")));
    const auto order = names(s, s.topological_order());
    EXPECT_EQ(order.back(), "Sales");
}

TEST(Schema, ResolvePathAndTarget) {
    const auto db = make_obj();
    const auto& s = db.schema();
    const std::vector<std::string> idents{"size", "label"};
    const auto p = s.resolve_path(s.id_of("Objects"), idents);
    EXPECT_EQ(s.path_name(p), "size.label");
    EXPECT_EQ(s.path_target(p), kString);
    const std::vector<std::string> bad{"size", "nope"};
    EXPECT_FALSE(s.try_resolve_path(s.id_of("Objects"), bad));
    EXPECT_EQ(code_of([&] { s.resolve_path(s.id_of("Objects"), bad); }), ErrorCode::InvalidPath);
}

} // namespace
} // namespace codm
