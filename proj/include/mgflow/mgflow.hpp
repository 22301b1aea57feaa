// Umbrella header.
#pragma once

#include "mgflow/ansatz.hpp"
#include "mgflow/fields.hpp"
#include "mgflow/flow.hpp"
#include "mgflow/quasilinear.hpp"
#include "mgflow/residual_report.hpp"
