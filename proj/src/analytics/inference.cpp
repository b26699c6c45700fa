#include "codm/analytics/inference.hpp"

#include <algorithm>

namespace codm::analytics {

std::vector<ConceptId> inference_facts(const Database& db, const ConstraintSet& inputs,
                                       ConceptId target) {
    const Schema& s = db.schema();
    (void)s.get(target);
    for (const auto& [c, allowed] : inputs) (void)s.get(c);

    std::vector<ConceptId> candidates;
    for (ConceptId f : s.concepts()) {
        if (is_primitive(f) || !s.reaches(f, target)) continue;
        const bool below_all = std::all_of(inputs.begin(), inputs.end(), [&](const auto& in) {
            return in.first == f || s.reaches(f, in.first);
        });
        if (below_all) candidates.push_back(f);
    }
    std::vector<ConceptId> maximal;
    for (ConceptId f : candidates) {
        const bool dominated = std::any_of(candidates.begin(), candidates.end(), [&](ConceptId g) {
            return g != f && s.reaches(f, g);
        });
        if (!dominated) maximal.push_back(f);
    }
    if (maximal.empty())
        throw Error(ErrorCode::NoCommonSubconcept,
                    "no concept lies below '" + s.name_of(target) +
                        "' and every constrained concept");
    return maximal;
}

std::vector<ItemRef> infer(const Database& db, const ConstraintSet& inputs, ConceptId target) {
    const Schema& s = db.schema();
    std::set<ItemRef> reached;
    for (ConceptId fact : inference_facts(db, inputs, target)) {
        std::vector<std::pair<const std::set<ItemRef>*, std::vector<DimPath>>> checks;
        for (const auto& [c, allowed] : inputs)
            checks.emplace_back(&allowed, s.enumerate_paths(fact, c));
        const auto up = s.enumerate_paths(fact, target);

        for (ItemRef item : db.store().extent(s, fact)) {
            bool survives = true;
            for (const auto& [allowed, paths] : checks) {
                for (const auto& p : paths) {
                    const Value v = db.store().get_super(s, item, p);
                    const auto* r = std::get_if<ItemRef>(&v);
                    if (!r || !allowed->count(*r)) {
                        survives = false;
                        break;
                    }
                }
                if (!survives) break;
            }
            if (!survives) continue;
            for (const auto& p : up)
                if (const Value v = db.store().get_super(s, item, p); is_ref(v))
                    reached.insert(std::get<ItemRef>(v));
        }
    }
    std::vector<ItemRef> out;
    const auto own = inputs.find(target);
    for (ItemRef t : db.store().extent(s, target))
        if (reached.count(t) && (own == inputs.end() || own->second.count(t))) out.push_back(t);
    return out;
}

} // namespace codm::analytics
