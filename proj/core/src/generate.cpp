#include "stragglar/generate.hpp"

#include "stragglar/baselines.hpp"
#include "stragglar/error.hpp"
#include "stragglar/even_generator.hpp"
#include "stragglar/stragglar_generator.hpp"

namespace stragglar {

bool is_supported(Algorithm algo, int n) {
  if (n < 2) return false;
  switch (algo) {
    case Algorithm::StragglAR: return n % 2 == 0;
    case Algorithm::Ring: return true;
    case Algorithm::RHD:
    case Algorithm::Broadcast: return is_power_of_two(n);
  }
  return false;
}

std::string supported_sizes(Algorithm algo) {
  switch (algo) {
    case Algorithm::StragglAR: return "even n >= 2 (powers of two use the closed-form schedule)";
    case Algorithm::Ring: return "any n >= 2";
    case Algorithm::RHD:
    case Algorithm::Broadcast: return "powers of two n >= 2";
  }
  return "none";
}

Schedule generate_schedule(Algorithm algo, int n, EvenPolicy policy) {
  if (n < 2) throw InvalidSizeError("n must be at least 2, got " + std::to_string(n));
  if (!is_supported(algo, n)) {
    throw UnsupportedSizeError(std::string(to_string(algo)) + " does not support n = " +
                               std::to_string(n) + "; supported: " + supported_sizes(algo));
  }
  switch (algo) {
    case Algorithm::StragglAR:
      return is_power_of_two(n) ? generate_stragglar(n) : generate_stragglar_even(n, policy);
    case Algorithm::Ring: return generate_ring(n);
    case Algorithm::RHD: return generate_rhd(n);
    case Algorithm::Broadcast: return generate_broadcast(n, n - 1);
  }
  throw Error("unknown algorithm");
}

}  // namespace stragglar
