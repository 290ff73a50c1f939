#include "tcof/topologies.hpp"

namespace tcof::topologies {

std::string_view default_network() {
  // A 224x224 frame reaches conv5 at 13x13; the first fc layer sees
  // 256 x 6 x 6 = 9216 inputs.
  return R"(input 3 224 224
conv out=96 k=11 stride=4 pad=2 groups=1
relu
lrn depth=5 k=2 alpha=0.0001 beta=0.75
maxpool k=3 stride=2
conv out=256 k=5 stride=1 pad=2 groups=2
relu
lrn depth=5 k=2 alpha=0.0001 beta=0.75
maxpool k=3 stride=2
conv out=384 k=3 stride=1 pad=1 groups=1
relu
conv out=384 k=3 stride=1 pad=1 groups=2
relu
conv out=256 k=3 stride=1 pad=1 groups=2
relu
maxpool k=3 stride=2
fc out=4096 in=9216
relu
fc out=4096
relu
)";
}

std::string_view test_network() {
  return R"(input 1 32 32
conv out=8 k=5 stride=1 pad=2 groups=1
relu
maxpool k=2 stride=2
conv out=16 k=3 stride=1 pad=1 groups=2
relu
lrn depth=5 k=2 alpha=0.0001 beta=0.75
maxpool k=2 stride=2
fc out=16
relu
)";
}

}  // namespace tcof::topologies
