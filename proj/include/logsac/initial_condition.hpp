#pragma once

#include <functional>
#include <string>

#include "logsac/spectral.hpp"

namespace logsac {

/// Compiled scalar expression in x and y, e.g.
/// "0.4*(cos(pi*x)*sin(pi*y) + sin(pi*x)*cos(2*pi*y)) + 0.2".
/// Supports + - * / ^, parentheses, numbers, pi, x, y and the functions
/// sin cos tan exp log sqrt abs tanh.
using Expression = std::function<double(double, double)>;

/// Throws std::invalid_argument with the offending position on parse errors.
Expression parse_expression(const std::string& text);

/// Expression text behind a preset name, or the input itself when it is not a
/// preset. Presets: fig1 (alias fig3, fig1/3), fig4, fig5 (alias fig6), zero.
std::string resolve_initial_condition(const std::string& name);

/// Grid evaluation of the preset or expression, projected onto the N modes of
/// the basis. Throws std::domain_error when a grid value is not finite.
Field initial_condition(const std::string& name, BasisPtr basis);

}  // namespace logsac
