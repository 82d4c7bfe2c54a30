#ifndef FOVOPT_LOG_HPP
#define FOVOPT_LOG_HPP

#include <functional>
#include <string>

namespace fovopt {

using WarnHandler = std::function<void(const std::string&)>;

// Non-fatal diagnostics (degenerate groups, skipped screening, ...) go
// through this hook. Default prints "warning: ..." to stderr.
void set_warn_handler(WarnHandler handler);
void warn(const std::string& message);

}  // namespace fovopt

#endif  // FOVOPT_LOG_HPP
