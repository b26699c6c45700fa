#pragma once

#include "codm/database.hpp"

#include <string_view>

namespace codm::testing {

struct ObjOptions {
    bool size_nullable = false;
    bool sizes_local = false;
};

/// Sizes{label}, Colors{name}, Objects{size, colour}; the small green object
/// is absent.
Database make_obj(ObjOptions options = {});
/// Countries{CountryName, CountryPopulation}: Germany 80, France 50, Italy 40.
Database make_geo();
/// The geography fixture plus Products{cat} and Sales{country, product, amount}.
Database make_sales();

ItemRef ref(const Database& db, std::string_view concept_name, std::uint64_t id);

} // namespace codm::testing
