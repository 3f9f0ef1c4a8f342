#ifndef BOUNDFORGE_SRC_PROPAGATORS_HPP
#define BOUNDFORGE_SRC_PROPAGATORS_HPP

#include "boundforge/model.hpp"

#include <memory>
#include <span>

namespace boundforge::detail {

std::unique_ptr<Propagator> make_propagator(const ConstraintSpec& spec);
std::unique_ptr<Propagator> make_lex_greater(std::span<const VarRef> vars, std::span<const Value> tuple);

} // namespace boundforge::detail

#endif
