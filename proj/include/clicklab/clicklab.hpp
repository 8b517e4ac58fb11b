// Copyright 2026 the clicklab authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "clicklab/binomial.hpp"
#include "clicklab/calibration.hpp"
#include "clicklab/criteria.hpp"
#include "clicklab/detector_response.hpp"
#include "clicklab/errors.hpp"
#include "clicklab/io.hpp"
#include "clicklab/jacobi.hpp"
#include "clicklab/moments.hpp"
#include "clicklab/multiplex.hpp"
#include "clicklab/pdc_oracle.hpp"
#include "clicklab/photon_states.hpp"
#include "clicklab/rng.hpp"
#include "clicklab/run_config.hpp"
#include "clicklab/version.hpp"
