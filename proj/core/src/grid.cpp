#include "fluctlab/grid.hpp"

// Grid is header-only; this TU anchors the header for the build.
namespace fluctlab::meanfield {}
