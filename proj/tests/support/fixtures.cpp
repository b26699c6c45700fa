#include "fixtures.hpp"

namespace codm::testing {

Database make_obj(ObjOptions options) {
    Database db;
    ConceptSpec sizes{"Sizes", {{"label", "String"}}};
    if (options.sizes_local) sizes.gc_scope = GcScope::local;
    db.define_concept(sizes);
    db.define_concept({"Colors", {{"name", "String"}}});
    DimSpec size{"size", "Sizes"};
    size.nullable = options.size_nullable;
    db.define_concept({"Objects", {size, {"colour", "Colors"}}});
    const auto s1 = db.insert("Sizes", {std::string("small")});
    const auto s2 = db.insert("Sizes", {std::string("large")});
    const auto c1 = db.insert("Colors", {std::string("green")});
    const auto c2 = db.insert("Colors", {std::string("red")});
    db.insert("Objects", {s1, c2});
    db.insert("Objects", {s2, c1});
    db.insert("Objects", {s2, c2});
    return db;
}

Database make_geo() {
    Database db;
    db.define_concept(
        {"Countries", {{"CountryName", "String"}, {"CountryPopulation", "Integer"}}});
    db.insert("Countries", {std::string("Germany"), std::int64_t{80}});
    db.insert("Countries", {std::string("France"), std::int64_t{50}});
    db.insert("Countries", {std::string("Italy"), std::int64_t{40}});
    return db;
}

Database make_sales() {
    Database db = make_geo();
    db.define_concept({"Products", {{"cat", "String"}}});
    db.define_concept(
        {"Sales", {{"country", "Countries"}, {"product", "Products"}, {"amount", "Integer"}}});
    const auto p1 = db.insert("Products", {std::string("food")});
    const auto p2 = db.insert("Products", {std::string("tools")});
    const auto de = ref(db, "Countries", 1);
    const auto fr = ref(db, "Countries", 2);
    db.insert("Sales", {de, p1, std::int64_t{10}});
    db.insert("Sales", {de, p2, std::int64_t{5}});
    db.insert("Sales", {fr, p1, std::int64_t{7}});
    return db;
}

ItemRef ref(const Database& db, std::string_view concept_name, std::uint64_t id) {
    return ItemRef{db.schema().id_of(concept_name), id};
}

} // namespace codm::testing
