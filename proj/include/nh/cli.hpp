#pragma once

namespace nh {

/// Command-line entry point. Exit codes: 0 success, 1 solver failure,
/// 2 configuration error.
int cli_dispatch(int argc, const char* const* argv);

} // namespace nh
