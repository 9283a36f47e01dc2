#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace svrmm {

enum class Method { Saga, Svrg, Sarah, Full };

/// "mm-saga", "mm-svrg", "mm-sarah", "mm-full".
std::string_view method_name(Method m);
/// Accepts the names above, with or without the "mm-" prefix; throws ConfigError otherwise.
Method parse_method(std::string_view s);

/// Constants of the per-method variance recursion
///   E_k Upsilon^{k+1} <= (1 - rho) Upsilon^k + V_Upsilon E_k ||x^{k+1} - x^k||^2
/// and the extra SARAH variance term V, for a given (mu, L, n, b, m).
struct TheoryConstants {
  Method method = Method::Full;
  double rho = 1.0;
  double v_upsilon = 0.0;
  double v = 0.0;
  double mu = 0.0;
  double L = 0.0;
  std::size_t b = 1;
  std::size_t m = 1;
  std::size_t n = 1;

  static TheoryConstants make(Method method, double mu, double L, std::size_t n, std::size_t b, std::size_t m);

  /// (2 mu - L)^2 - 4 (V + V_Upsilon / rho); convergence needs this to be positive.
  double condition_margin() const;
};

}  // namespace svrmm
