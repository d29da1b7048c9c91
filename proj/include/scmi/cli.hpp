#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain failure,
// 2 usage/config error, 3 numerical failure.

namespace scmi {

int run_cli(int argc, const char* const* argv);

} // namespace scmi
