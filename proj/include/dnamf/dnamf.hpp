#pragma once

#include "dnamf/dataset.hpp"
#include "dnamf/design.hpp"
#include "dnamf/diagnostics.hpp"
#include "dnamf/dna_fit.hpp"
#include "dnamf/dna_predict.hpp"
#include "dnamf/errors.hpp"
#include "dnamf/gaussian.hpp"
#include "dnamf/gp_level1.hpp"
#include "dnamf/kernels.hpp"
#include "dnamf/linalg.hpp"
#include "dnamf/mc_oracle.hpp"
#include "dnamf/metrics.hpp"
#include "dnamf/nonnested_sem.hpp"
#include "dnamf/optimizer.hpp"
#include "dnamf/random.hpp"
#include "dnamf/serialize.hpp"
