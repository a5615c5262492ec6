#pragma once

#include <string>
#include <variant>
#include <vector>

#include "loadcast/common.hpp"

namespace loadcast {

// Model-formula mini-language:
//   response ~ term (+ term)*
//   term := name                      linear effect
//         | name:name                 categorical interaction (dummy-coded)
//         | s(name, k=INT[, cyclic])  penalized cubic spline
//         | te(name, name, k=INT)     tensor-product spline
//         | lagterm(name, by=name)    per-level slopes of a lagged regressor
//   `response ~ 1` is the intercept-only model.

struct LinearTerm {
    std::string var;
};

struct CatInteraction {
    std::string a;
    std::string b;
};

struct SmoothTerm {
    std::string var;
    int k = 0;
    bool cyclic = false;
};

struct TensorTerm {
    std::string var1;
    std::string var2;
    int k = 0;
};

struct ByLagTerm {
    std::string var;
    std::string by;
};

using FormulaTerm = std::variant<LinearTerm, CatInteraction, SmoothTerm, TensorTerm, ByLagTerm>;

struct Formula {
    std::string response;
    std::vector<FormulaTerm> terms;
};

// Throws DataError carrying the character position on bad input.
Formula parse_formula(const std::string& text);

// Canonical printer; parse(print(f)) round-trips.
std::string print_formula(const Formula& formula);
std::string term_label(const FormulaTerm& term);

// All column names referenced by the formula (response excluded).
std::vector<std::string> formula_variables(const Formula& formula);

}  // namespace loadcast
