#pragma once

#include <functional>
#include <string>

namespace qrv {

using WarningHandler = std::function<void(const std::string&)>;

// Installs a process-wide sink for library warnings and returns the previous
// one. The default writes "qrv: warning: ..." to std::clog.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace qrv
