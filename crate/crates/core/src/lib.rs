//! Joint charger sizing and charge scheduling for electric truck fleets.
//!
//! A [`Scenario`] lists trucks, their daily itineraries, a charger catalog
//! and energy prices. [`build_problem`] turns it into a mixed-integer linear
//! program that picks how many chargers of each type to build where and
//! when every truck charges, minimizing energy, capital and weighted demand
//! charges. [`solve_scenario`] solves the model exactly, decodes the plan
//! and replays it through an independent [`validator`].
//!
//! ```
//! use chargeplan::{prepare, solve_scenario, synth, SolveOptions};
//!
//! let params = synth::SynthParams { trucks: 1, locations: 2, days: 1, ..Default::default() };
//! let vs = prepare(&synth::generate_synthetic(&params)).unwrap();
//! let outcome = solve_scenario(&vs, &SolveOptions::default()).unwrap();
//! assert!(outcome.verified());
//! ```

pub mod baseline;
mod domain;
mod error;
pub mod io;
pub mod model;
pub mod plan;
pub mod report;
mod scenario;
mod solve;
pub mod sweep;
pub mod synth;
pub mod validator;

pub use baseline::{compare_designs, rule_based_design, DesignComparison, Policy};
pub use domain::{
    validate_scenario, Design, FixedCounts, Location, PriceSchedule, TimeGrid, TripLeg, Truck,
    ValidatedScenario, ValidationError,
};
pub use error::{Error, Result};
pub use io::{load_scenario, prepare};
pub use model::{build_problem, BuildDiagnostic, BuiltModel, VarKey, VariableCatalog};
pub use plan::{CostBreakdown, PlanReport};
pub use scenario::{
    quantize_times, ChargerType, Clock, DesignMode, EnergyPrices, FixedCountsSpec, LegSpec,
    LocationKind, LocationSpec, Params, PeakConvention, PriceSpec, Rounding, Scenario, TimeGridSpec,
    TruckSpec, WindowConvention,
};
pub use solve::{dump_lp, solve_scenario, SolveOptions, SolveOutcome};
pub use validator::{recompute_costs, replay, Replay, Verdict, Violation};

pub use chargeplan_milp as milp;

// The guide's snippets run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/scenarios.md")]
    mod scenarios {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
