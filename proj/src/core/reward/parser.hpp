#pragma once

#include <cstdint>

#include "core/reward/ast.hpp"
#include "core/reward/reward.hpp"

namespace prof::lang {

// Parses a reward program and runs all static checks (types, index
// bounds, arity, let resolution).  The returned AST is fully resolved.
Program parse_program(const std::string& text, Arity arity, int32_t obs_dim,
                      int32_t act_dim);

}  // namespace prof::lang
