#pragma once

#include "fbcap/bounds.hpp"
#include "fbcap/coding.hpp"
#include "fbcap/noise_model.hpp"
#include "fbcap/synthesis.hpp"

#include "json.hpp"

namespace fbcap {

// NoiseModel <-> {"num": [...], "den": [...]}; coefficients are powers of z^{-1},
// index 0 = constant term.
nlohmann::json to_json(const NoiseModel& model);
NoiseModel noise_model_from_json(const nlohmann::json& j);

// FirFilter <-> {"coeffs": [...], "alpha": scale}
nlohmann::json to_json(const FirFilter& fir);
FirFilter fir_filter_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StateSpace& ss);
StateSpace state_space_from_json(const nlohmann::json& j);

// Matrices row-major, eigenvalues as (re, im) pairs.
nlohmann::json to_json(const CodingScheme& scheme);

nlohmann::json to_json(const BoundsReport& report);
BoundsReport bounds_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TransmissionStats& stats);
TransmissionStats transmission_stats_from_json(const nlohmann::json& j);

}  // namespace fbcap
