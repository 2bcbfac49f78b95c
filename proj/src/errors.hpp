#pragma once

#include <stdexcept>
#include <string>

namespace zkt {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Witness does not satisfy the relation being proved (caught prover-side).
struct WitnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Malformed serialized data / wrong structure; distinct from a verification reject.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FoldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedFoldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedLayerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct CompilerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct QuantOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ArtifactMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace zkt
