#ifndef BOUNDFORGE_CLI_HPP
#define BOUNDFORGE_CLI_HPP

#include "boundforge/selector.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>

namespace boundforge::cli {

using SelectFn = std::function<SelectionReport(const CtrSpec&, std::span<const Candidate>)>;

/// What compare runs on each side. Tests swap one for a broken selector.
struct Hooks {
    SelectFn incremental;
    SelectFn baseline;
};

Hooks default_hooks();

enum Exit : int { Ok = 0, Failed = 1, Usage = 2 };

/// args excludes the program name. Reads BOUNDFORGE_MAX_N.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Hooks& hooks = default_hooks());

} // namespace boundforge::cli

#endif
