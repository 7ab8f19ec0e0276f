#ifndef INVCNN_INVCNN_HPP
#define INVCNN_INVCNN_HPP

#include "invcnn/common.hpp"
#include "invcnn/conv_algebra.hpp"
#include "invcnn/proximal.hpp"
#include "invcnn/neuron.hpp"
#include "invcnn/csc.hpp"
#include "invcnn/coherency.hpp"
#include "invcnn/image.hpp"
#include "invcnn/stats.hpp"
#include "invcnn/network.hpp"
#include "invcnn/experiment.hpp"
#include "invcnn/runtime.hpp"

#endif  // INVCNN_INVCNN_HPP
