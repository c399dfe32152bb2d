#pragma once

// JSON views of library results. Keys are lower_snake_case; insertion order
// is kept so serialized reports are byte-stable.

#include "json.hpp"

#include <string>
#include <vector>

#include "zdistill/appendix.hpp"
#include "zdistill/cavity_model.hpp"
#include "zdistill/linalg.hpp"
#include "zdistill/purification.hpp"
#include "zdistill/qubit_model.hpp"

namespace zdistill {

using Json = nlohmann::ordered_json;

inline Json to_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

inline Json to_json(const ComplexVector& v) {
    Json arr = Json::array();
    for (Index k = 0; k < v.size(); ++k) arr.push_back(Json::array({v(k).real(), v(k).imag()}));
    return arr;
}

inline Json to_json(const AsymptoticReport& r) {
    Json j;
    j["lambda0"] = to_json(r.lambda0);
    j["abs_lambda0"] = r.abs_lambda0;
    j["gap"] = r.gap;
    j["optimal"] = r.optimal;
    j["unique"] = r.unique;
    j["prefactor"] = r.prefactor;
    j["target"] = to_json(r.target.vector());
    j["left0"] = to_json(r.left0);
    Json dom = Json::array();
    for (const auto& d : r.dominant) {
        dom.push_back(Json{{"lambda", to_json(d.lambda)}, {"weight", d.weight}, {"right", to_json(d.right.vector())}});
    }
    j["dominant"] = dom;
    if (const auto k = r.populated_target()) {
        j["populated_index"] = *k;
    } else {
        j["populated_index"] = nullptr;
    }
    return j;
}

inline Json to_json(const TraceRow& r) {
    return Json{{"n", r.n}, {"yield", r.yield}, {"fidelity", r.fidelity}, {"purity", r.purity}};
}

namespace qubit {

inline Json to_json(const QubitParams& p) {
    return Json{{"omega", p.omega}, {"g_a", p.g_a}, {"g_b", p.g_b}, {"t_a", p.t_a},
                {"t_b", p.t_b}, {"tau_a", p.tau_a}, {"tau_b", p.tau_b}};
}

inline Json to_json(const OptimalPoint& pt) {
    return Json{{"x", pt.x}, {"y", pt.y}, {"z", pt.z}, {"chi", pt.chi},
                {"lambda0_re", pt.lambda0.real()}, {"lambda0_im", pt.lambda0.imag()}, {"branch", to_string(pt.branch)}};
}

inline Json to_json(const RejectedCandidate& c) {
    return Json{{"x", c.x}, {"y", c.y}, {"z", c.z}, {"branch", to_string(c.branch)}, {"reason", c.reason}};
}

inline Json to_json(const OptimalSolution& s) {
    Json roots = Json::array(), rejected = Json::array();
    for (const auto& r : s.roots) roots.push_back(to_json(r));
    for (const auto& r : s.rejected) rejected.push_back(to_json(r));
    return Json{{"x", s.x}, {"roots", roots}, {"rejected", rejected}};
}

} // namespace qubit

namespace cavity {

inline Json to_json(const CavityParams& p) {
    return Json{{"omega", p.omega}, {"g_a", p.g_a}, {"g_b", p.g_b}, {"t_a", p.t_a}, {"t_b", p.t_b},
                {"tau_a", p.tau_a}, {"tau_b", p.tau_b}, {"k_max", p.k_max}, {"T", p.T()}};
}

inline Json to_json(const SectorReport& r) {
    Json vecs = Json::array();
    for (const auto& v : r.unit_eigenvectors) vecs.push_back(zdistill::to_json(v));
    return Json{{"k", r.k}, {"eigenvalue_magnitudes", r.eigenvalue_magnitudes}, {"unit_eigenvectors", vecs}, {"split", r.split}};
}

} // namespace cavity

namespace appendix {

inline Json to_json(const UnitScanRow& r) {
    return Json{{"k", r.k}, {"ga_ta", r.ga_ta}, {"gb_tb", r.gb_tb}, {"p_k", r.Pk}, {"j_k", r.Jk},
                {"max_abs_eig", r.max_abs_eig}, {"plus_one", r.plus_one}, {"determinant_zero", r.determinant_zero}};
}

} // namespace appendix

} // namespace zdistill
