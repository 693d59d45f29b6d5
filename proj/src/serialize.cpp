#include "fbcap/serialize.hpp"

namespace fbcap {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = rows > 0 ? static_cast<int>(j.at(0).size()) : 0;
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int k = 0; k < cols; ++k) m(i, k) = j.at(i).at(k).get<double>();
    return m;
}

}  // namespace

json to_json(const NoiseModel& model) {
    return json{{"num", model.numerator()}, {"den", model.denominator()}};
}

NoiseModel noise_model_from_json(const json& j) {
    return NoiseModel(j.at("num").get<std::vector<double>>(),
                      j.value("den", std::vector<double>{1.0}));
}

json to_json(const FirFilter& fir) {
    return json{{"coeffs", fir.coeffs}, {"alpha", fir.scale}};
}

FirFilter fir_filter_from_json(const json& j) {
    return FirFilter{j.at("coeffs").get<std::vector<double>>(), j.value("alpha", 1.0)};
}

json to_json(const StateSpace& ss) {
    return json{{"A", matrix_to_json(ss.A)},
                {"B", matrix_to_json(ss.B)},
                {"C", matrix_to_json(ss.C)},
                {"D", matrix_to_json(ss.D)}};
}

StateSpace state_space_from_json(const json& j) {
    return StateSpace(matrix_from_json(j.at("A")), matrix_from_json(j.at("B")),
                      matrix_from_json(j.at("C")), matrix_from_json(j.at("D")));
}

json to_json(const CodingScheme& scheme) {
    json eigs = json::array();
    for (const auto& lam : scheme.unstable_eigs) eigs.push_back({lam.real(), lam.imag()});
    return json{{"As", matrix_to_json(scheme.As)}, {"Au", matrix_to_json(scheme.Au)},
                {"Bs", matrix_to_json(scheme.Bs)}, {"Bu", matrix_to_json(scheme.Bu)},
                {"Cs", matrix_to_json(scheme.Cs)}, {"Cu", matrix_to_json(scheme.Cu)},
                {"unstable_eigs", std::move(eigs)},
                {"rate_bits", scheme.rate_bits},
                {"message_dim", scheme.message_dim}};
}

json to_json(const BoundsReport& report) {
    json j{{"h", report.h},
           {"m", report.m},
           {"upper_bits", report.upper_bits},
           {"dual_value_bits", report.dual_value_bits},
           {"quad_error_estimate", report.quad_error_estimate},
           {"solver_iterations", report.solver_iterations},
           {"solver_certificate", report.solver_certificate},
           {"ok", report.ok}};
    if (report.lower_bits) j["lower_bits"] = *report.lower_bits;
    if (report.gap_bits) j["gap_bits"] = *report.gap_bits;
    if (!report.error.empty()) j["error"] = report.error;
    return j;
}

BoundsReport bounds_report_from_json(const json& j) {
    BoundsReport r;
    r.h = j.at("h").get<int>();
    r.m = j.at("m").get<int>();
    r.upper_bits = j.at("upper_bits").get<double>();
    r.dual_value_bits = j.at("dual_value_bits").get<double>();
    r.quad_error_estimate = j.at("quad_error_estimate").get<double>();
    r.solver_iterations = j.at("solver_iterations").get<int>();
    r.solver_certificate = j.at("solver_certificate").get<double>();
    r.ok = j.at("ok").get<bool>();
    if (j.contains("lower_bits")) r.lower_bits = j.at("lower_bits").get<double>();
    if (j.contains("gap_bits")) r.gap_bits = j.at("gap_bits").get<double>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
}

json to_json(const TransmissionStats& stats) {
    return json{{"trials", stats.trials},
                {"horizon", stats.horizon},
                {"empirical_input_power", stats.empirical_input_power},
                {"decode_error_rate", stats.decode_error_rate},
                {"mean_estimate_error", stats.mean_estimate_error}};
}

TransmissionStats transmission_stats_from_json(const json& j) {
    TransmissionStats s;
    s.trials = j.at("trials").get<int>();
    s.horizon = j.at("horizon").get<int>();
    s.empirical_input_power = j.at("empirical_input_power").get<double>();
    s.decode_error_rate = j.at("decode_error_rate").get<double>();
    s.mean_estimate_error = j.at("mean_estimate_error").get<double>();
    return s;
}

}  // namespace fbcap
