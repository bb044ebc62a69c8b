#include "hbtrain/config.hpp"

#include <cmath>

#include "hbtrain/errors.hpp"

namespace hbtrain {

void SystemConfig::validate() const {
  if (n_tx < 1) throw InvalidParameterError("n_tx must be positive");
  if (n_rx < 1) throw InvalidParameterError("n_rx must be positive");
  if (n_rf < 2) throw InvalidParameterError("n_rf must be at least 2");
  if (n_rx % n_rf != 0)
    throw InvalidParameterError("n_rx must be divisible by n_rf");
  if (q_slots < 1) throw InvalidParameterError("q_slots must be positive");
  if (q_slots > max_slots())
    throw InvalidParameterError(
        "q_slots must not exceed n_rx*n_tx/n_rf = " +
        std::to_string(max_slots()));
  if (!(energy_budget > 0.0))
    throw InvalidParameterError("energy_budget must be positive");
  if (!(noise_var > 0.0))
    throw InvalidParameterError("noise_var must be positive");
  if (!(std::abs(rho) < 1.0))
    throw InvalidParameterError("|rho| must be less than 1");
  if (n_streams < 1 || n_streams > n_rf)
    throw InvalidParameterError("n_streams must lie in [1, n_rf]");
  if (!(bandwidth_hz > 0.0))
    throw InvalidParameterError("bandwidth_hz must be positive");
  if (!(velocity_mps > 0.0))
    throw InvalidParameterError("velocity_mps must be positive");
  if (!(carrier_hz > 0.0))
    throw InvalidParameterError("carrier_hz must be positive");
  if (!(tol > 0.0)) throw InvalidParameterError("tol must be positive");
  if (altmin_max_iter < 1)
    throw InvalidParameterError("altmin_max_iter must be positive");
  if (!(altmin_tol > 0.0))
    throw InvalidParameterError("altmin_tol must be positive");
}

}  // namespace hbtrain
