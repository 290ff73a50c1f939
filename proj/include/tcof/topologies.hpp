#pragma once

#include <string_view>

namespace tcof::topologies {

// Five convolutional and two fully-connected layers on a 3x224x224 input,
// with grouped conv2, conv4 and conv5 (two groups each). The output is the
// rectified second fc layer, 4096 wide.
std::string_view default_network();

// Two conv layers and one fc layer on a 1x32x32 input with a 16-wide
// output. Used for desk-scale runs with random weights.
std::string_view test_network();

}  // namespace tcof::topologies
