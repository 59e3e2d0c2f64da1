#pragma once

#include "actuators.hpp"
#include "care.hpp"
#include "controller.hpp"
#include "csv.hpp"
#include "disturbance.hpp"
#include "errors.hpp"
#include "hinf_norm.hpp"
#include "integrator.hpp"
#include "linalg.hpp"
#include "reference_data.hpp"
#include "simulator.hpp"
#include "state_space.hpp"
#include "vehicle_model.hpp"
