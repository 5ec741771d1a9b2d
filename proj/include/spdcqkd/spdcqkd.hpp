#pragma once

#include "spdcqkd/bases.hpp"
#include "spdcqkd/error.hpp"
#include "spdcqkd/io.hpp"
#include "spdcqkd/optimizer.hpp"
#include "spdcqkd/qkd_metrics.hpp"
#include "spdcqkd/quantum_core.hpp"
#include "spdcqkd/spdc_model.hpp"
#include "spdcqkd/tomography.hpp"
#include "spdcqkd/version.hpp"
