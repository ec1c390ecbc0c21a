#pragma once

#include "physim/alpha_model.hpp"
#include "physim/cost.hpp"
#include "physim/error.hpp"
#include "physim/event_calendar.hpp"
#include "physim/flow_machine.hpp"
#include "physim/gadgets.hpp"
#include "physim/kinetic_machine.hpp"
#include "physim/matrix.hpp"
#include "physim/random.hpp"
#include "physim/scaling.hpp"
