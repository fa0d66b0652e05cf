#pragma once

#include <map>
#include <string>

#include "arbor/machine.hpp"

namespace arbor {

/// Resolves machine names inside s-expressions, e.g. (gen grig b).
using MachineRegistry = std::map<std::string, MachinePtr, std::less<>>;

/// Grammar:
///   (id M)            identity over arity M
///   (gen MACHINE S)   machine state S
///   (rooted I0 I1 ..) rooted automorphism with the given image list
///   (* E E ...)       product, left to right
///   (inv E)           inverse
///   (graft E "V")     section E grafted at the digit-string vertex V
///   (trunc E N)       truncation at level N
///   (conj E F)        F^-1 E F
///   (comm E F)        commutator [E, F]
///   (pow E K)         integer power
///   (delete E N)      deletion-of-levels embedding into T_{m^N}
Expr parse_sexpr(const std::string& text, const MachineRegistry& machines);

std::string to_sexpr(Expr e, const MachineRegistry& machines);

}  // namespace arbor
