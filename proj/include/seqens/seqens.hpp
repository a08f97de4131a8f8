#pragma once

#include "seqens/baselines.hpp"
#include "seqens/config.hpp"
#include "seqens/datahub.hpp"
#include "seqens/digest.hpp"
#include "seqens/evalkit.hpp"
#include "seqens/halting.hpp"
#include "seqens/losses.hpp"
#include "seqens/nets.hpp"
#include "seqens/ops.hpp"
#include "seqens/optim.hpp"
#include "seqens/rng.hpp"
#include "seqens/svgplot.hpp"
#include "seqens/tensor.hpp"
#include "seqens/training.hpp"
