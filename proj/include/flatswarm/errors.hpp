#pragma once

#include <stdexcept>

namespace flatswarm {

// Base class for every error thrown by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Jet arithmetic left its domain: division by a jet with zero constant term,
// sqrt of a non-positive constant term, atan2 of two jets at the origin.
struct singular_jet_error : error {
  using error::error;
};

// The altitude-based influence order is ill-defined (two vehicles at the same
// altitude) or conflicts with the fixed vehicle order (a higher-indexed
// vehicle above a lower-indexed one where the recursion needs the opposite).
struct ordering_error : error {
  using error::error;
};

// A level inverse failed while assembling the joint diffeomorphism.
struct singular_inverse_error : error {
  using error::error;
};

// A controller needed data for a vehicle outside the set it was handed.
struct info_contract_error : error {
  using error::error;
};

// A physical quantity left its admissible range (non-positive vertical
// separation, non-positive thrust, non-finite state).
struct domain_error : error {
  using error::error;
};

// A scenario configuration could not be parsed or validated.
struct config_error : error {
  using error::error;
};

// Gain synthesis failed (non-stabilizable pair, iteration divergence).
struct synthesis_error : error {
  using error::error;
};

}  // namespace flatswarm
