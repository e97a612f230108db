#pragma once

namespace oucl {

// Execution policy for the data-parallel kernels. `Serial` is the reference
// path kept for testing; `Parallel` distributes the same loop with OpenMP and
// must return the identical result.
enum class Exec { Serial, Parallel };

}  // namespace oucl
