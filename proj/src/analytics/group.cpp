#include "codm/analytics/group.hpp"

#include <cctype>

namespace codm::analytics {

query::ResultConcept group_aggregate(const Database& db, ConceptId groups,
                                     const std::string& member,
                                     const std::optional<query::Expr>& measure,
                                     query::AggFn agg) {
    const Schema& s = db.schema();
    const Concept& g = s.get(groups);
    if (!measure && agg != query::AggFn::Size)
        throw Error(ErrorCode::TypeError, std::string(query::agg_name(agg)) + " needs a measure");

    std::optional<ConceptId> sub;
    std::optional<DimPath> path;
    if (const auto dot = member.find('.'); dot != std::string::npos) {
        sub = s.find(member.substr(0, dot));
        if (sub) {
            std::vector<std::string> steps;
            std::size_t from = dot + 1;
            for (std::size_t next; (next = member.find('.', from)) != std::string::npos;
                 from = next + 1)
                steps.push_back(member.substr(from, next - from));
            steps.push_back(member.substr(from));
            path = s.try_resolve_path(*sub, steps);
            if (!path || s.path_target(*path) != groups)
                throw Error(ErrorCode::UnknownProperty,
                            "'" + member + "' does not lead to '" + g.name + "'", member);
        }
    }
    if (!path && !db.catalog().find_multi(groups, member))
        throw Error(ErrorCode::UnknownProperty,
                    "'" + member + "' is neither a subconcept path nor a multi-valued property of '" +
                        g.name + "'",
                    member);

    query::ResultConcept out;
    std::string key = g.name;
    key[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(key[0])));
    out.columns = {{key, groups}, {query::agg_name(agg), kTop}};
    for (ItemRef item : db.store().extent(s, groups)) {
        std::vector<ItemRef> members = path ? db.store().get_subs(s, item, *sub, *path)
                                            : db.mv_get(item, member);
        std::vector<Value> values;
        for (ItemRef m : members)
            values.push_back(measure ? query::evaluate_scalar(db, *measure, m) : Value{m});
        out.rows.push_back({item, query::aggregate_values(agg, values)});
    }
    ConceptId dom = kTop;
    for (const auto& row : out.rows) {
        if (is_null(row[1])) continue;
        const ConceptId k = value_concept(row[1]);
        dom = (dom == kTop || dom == k) ? k : kReal;
    }
    out.columns[1].domain = dom;
    return out;
}

} // namespace codm::analytics
