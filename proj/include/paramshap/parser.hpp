#pragma once

#include <string>

#include "paramshap/query.hpp"

namespace paramshap {

/// Parses the concrete query syntax, e.g.
///
///   Q(x, tdep; $d, $c) :- Flights(x, $d, a, "CDG", tdep), Airline(a, $c),
///                         [tdep + 1/2 <= 10], [$g => x != 3]
///
/// Head: free variables, then parameters after ';' (each prefixed '$').
/// Body: atoms and filters in any order, ',' separated. Atom terms are
/// variables, '$'-parameters, or constants (integers, rationals 'a/b',
/// 'true'/'false', double-quoted strings). Variables appearing only in the
/// body are bound. Filters compare two linear expressions over variables,
/// parameters and rational constants with < <= = != >= >; an optional
/// '$g =>' prefix names a 0/1 gate parameter that switches the filter on.
/// '#' starts a line comment. Throws ValidationError with line:column
/// positions on malformed input.
ParamQuery parse_query(const std::string& text);

}  // namespace paramshap
