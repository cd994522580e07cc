#pragma once

#include "tremor/dataset.hpp"
#include "tremor/errors.hpp"
#include "tremor/experiment.hpp"
#include "tremor/matrix.hpp"
#include "tremor/metrics.hpp"
#include "tremor/models.hpp"
#include "tremor/parallel.hpp"
#include "tremor/preprocess.hpp"
#include "tremor/random.hpp"
#include "tremor/selection.hpp"
#include "tremor/tree.hpp"
