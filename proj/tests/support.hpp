#pragma once

#include <deconf/reach.hpp>

namespace testing {

using deconf::Ideology;
using deconf::ReachTable;
using deconf::Subgroup;

/// Sets the five ideology buckets of one slice; `any` < 0 leaves the marginal cell absent.
inline void put(ReachTable& t, const std::string& id, Subgroup sg, int64_t vl, int64_t sl, int64_t m, int64_t sc,
                int64_t vc, int64_t any = -1) {
    size_t i = t.add_interest(id, "name of " + id);
    t.set_count(i, sg, Ideology::VeryLiberal, vl);
    t.set_count(i, sg, Ideology::SomewhatLiberal, sl);
    t.set_count(i, sg, Ideology::Moderate, m);
    t.set_count(i, sg, Ideology::SomewhatConservative, sc);
    t.set_count(i, sg, Ideology::VeryConservative, vc);
    if (any >= 0) t.set_count(i, sg, Ideology::Any, any);
}

/// Slice with the given liberal / conservative totals split evenly into buckets.
inline void put_lc(ReachTable& t, const std::string& id, Subgroup sg, int64_t L, int64_t C, int64_t any = -1) {
    put(t, id, sg, L / 2, L - L / 2, 0, C - C / 2, C / 2, any);
}

inline Subgroup sg(deconf::Category c, const char* label) { return *deconf::find_subgroup(c, label); }

}  // namespace testing
