#include "codm/database.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

namespace codm {
namespace {

using testing::make_obj;
using testing::make_sales;
using testing::ref;

std::string str(const char* s) { return s; }

TEST(Store, InsertAndExtent) {
    const auto db = make_obj();
    EXPECT_EQ(db.store().extent(db.schema(), db.schema().id_of("Objects")),
              (std::vector<ItemRef>{ref(db, "Objects", 1), ref(db, "Objects", 2),
                                    ref(db, "Objects", 3)}));
    EXPECT_TRUE(same_value(db.store().values(ref(db, "Objects", 1))[1], ref(db, "Colors", 2)));
    const auto geo = make_sales();
    EXPECT_EQ(geo.store().size(geo.schema().id_of("Countries")), 3u);
}

TEST(Store, InsertValidation) {
    auto db = make_obj();
    EXPECT_THROW(db.insert("Objects", {ref(db, "Sizes", 1)}), Error);
    try {
        db.insert("Objects", {ref(db, "Colors", 1), ref(db, "Colors", 2)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DomainViolation);
    }
    try {
        db.insert("Objects", {Null{}, ref(db, "Colors", 2)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NullForbidden);
    }
    try {
        db.insert("Objects", {ItemRef{db.schema().id_of("Sizes"), 9}, ref(db, "Colors", 2)});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DomainViolation);
    }
}

TEST(Store, GetSuper) {
    const auto db = make_obj();
    const auto& s = db.schema();
    const std::vector<std::string> steps{"size", "label"};
    const auto p = s.resolve_path(s.id_of("Objects"), steps);
    EXPECT_TRUE(same_value(db.store().get_super(s, ref(db, "Objects", 1), p), Value{str("small")}));
}

TEST(Store, GetSubs) {
    const auto db = make_obj();
    const auto& s = db.schema();
    const auto objects = s.id_of("Objects");
    const DimPath size{objects, {"size"}};
    EXPECT_EQ(db.store().get_subs(s, ref(db, "Sizes", 2), objects, size),
              (std::vector<ItemRef>{ref(db, "Objects", 2), ref(db, "Objects", 3)}));
    EXPECT_EQ(db.store().get_subs(s, ref(db, "Sizes", 1), objects, size),
              std::vector<ItemRef>{ref(db, "Objects", 1)});
    const auto sales = make_sales();
    const auto sc = sales.schema().id_of("Sales");
    EXPECT_EQ(sales.store().get_subs(sales.schema(), ref(sales, "Countries", 1), sc,
                                     DimPath{sc, {"country"}}),
              (std::vector<ItemRef>{ref(sales, "Sales", 1), ref(sales, "Sales", 2)}));
}

TEST(Store, UsageCounts) {
    const auto db = make_obj();
    EXPECT_EQ(db.store().usage(ref(db, "Sizes", 2)), 2);
    EXPECT_EQ(db.store().usage(ref(db, "Colors", 2)), 2);
    EXPECT_EQ(db.store().usage(ref(db, "Objects", 1)), 0);
}

TEST(Store, UpdateMaintainsUsage) {
    auto db = make_obj();
    db.update(ref(db, "Objects", 1), "size", ref(db, "Sizes", 2));
    EXPECT_EQ(db.store().usage(ref(db, "Sizes", 1)), 0);
    EXPECT_EQ(db.store().usage(ref(db, "Sizes", 2)), 3);
    EXPECT_TRUE(oracle::integrity(db).empty());
}

TEST(Store, CascadeDelete) {
    auto db = make_obj();
    const auto report = db.erase(ref(db, "Sizes", 2));
    EXPECT_EQ(report.deleted, (std::vector<ItemRef>{ref(db, "Objects", 2), ref(db, "Objects", 3),
                                                    ref(db, "Sizes", 2)}));
    EXPECT_TRUE(report.nulled.empty());
    EXPECT_TRUE(oracle::integrity(db).empty());
}

TEST(Store, NullifyingDelete) {
    auto db = make_obj({.size_nullable = true});
    const auto report = db.erase(ref(db, "Sizes", 2));
    EXPECT_EQ(report.deleted, std::vector<ItemRef>{ref(db, "Sizes", 2)});
    EXPECT_EQ(report.nulled, (std::vector<NulledSlot>{{ref(db, "Objects", 2), "size"},
                                                      {ref(db, "Objects", 3), "size"}}));
    EXPECT_TRUE(is_null(db.store().values(ref(db, "Objects", 2))[0]));
    EXPECT_TRUE(oracle::integrity(db).empty());
}

TEST(Store, IsolatedDelete) {
    auto db = make_obj();
    const auto fresh = db.insert("Sizes", {str("medium")});
    const auto report = db.erase(fresh);
    EXPECT_EQ(report.deleted, std::vector<ItemRef>{fresh});
    EXPECT_THROW(db.erase(fresh), Error);
}

TEST(Store, GarbageCollectionLocal) {
    auto db = make_obj({.sizes_local = true});
    db.erase(ref(db, "Objects", 1));
    EXPECT_EQ(db.collect_garbage(), std::vector<ItemRef>{ref(db, "Sizes", 1)});
}

TEST(Store, GarbageCollectionPersistent) {
    auto db = make_obj();
    db.erase(ref(db, "Objects", 1));
    EXPECT_TRUE(db.collect_garbage().empty());
}

TEST(Store, GarbageCollectionFixpoint) {
    Database db;
    db.define_concept({"A", {{"v", "Integer"}}, GcScope::local});
    db.define_concept({"B", {{"a", "A"}}, GcScope::local});
    db.define_concept({"C", {{"b", "B"}}, GcScope::local});
    const auto a = db.insert("A", {std::int64_t{1}});
    const auto b = db.insert("B", {a});
    const auto c = db.insert("C", {b});
    db.erase(c);
    EXPECT_EQ(db.collect_garbage(), (std::vector<ItemRef>{b, a}));
}

} // namespace
} // namespace codm
