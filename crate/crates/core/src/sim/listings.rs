//! Executable models of three canonical scenarios:
//!
//! * `HttpRequestFactory`: a polluter that installs a custom connection
//!   factory, a cleaner that resets it, and a victim that needs it unset.
//! * `EndpointSession`: two tests that each reset an endpoint before
//!   asserting on it. Deleting either reset makes that test a brittle.
//! * `PathGlob`: a class fixture initialises a directory; one test
//!   overwrites it, the other restores it before asserting. Deleting the
//!   restore makes the second test a victim.

use super::{SimClass, SimStatement, SimSuite, SimTest};

/// The bundled corpus file; identical to [`listings_suite`].
pub const LISTINGS_CORPUS: &str = include_str!("../../corpus/listings.json");

fn set(key: &str, value: &str) -> SimStatement {
    SimStatement::SetKey {
        key: key.into(),
        value: value.into(),
    }
}

fn expect(key: &str, value: &str) -> SimStatement {
    SimStatement::AssertEq {
        key: key.into(),
        expected: value.into(),
    }
}

pub fn listing_models() -> (SimClass, SimClass, SimClass) {
    let polluter_cleaner_victim = SimClass {
        name: "HttpRequestFactory".into(),
        before_all: vec![],
        tests: vec![
            SimTest::new("customConnectionFactory", vec![set("factory", "custom"), expect("factory", "custom")]),
            SimTest::new(
                "nullConnectionFactory",
                vec![
                    SimStatement::UnsetKey { key: "factory".into() },
                    SimStatement::AssertUnset { key: "factory".into() },
                ],
            ),
            SimTest::new(
                "postWithNumericQueryParams",
                vec![SimStatement::AssertUnset { key: "factory".into() }],
            ),
        ],
    };

    let helper = SimClass {
        name: "EndpointSession".into(),
        before_all: vec![],
        tests: vec![
            SimTest::new("testIdleTimeout", vec![set("endpoint", "ready"), expect("endpoint", "ready")]),
            SimTest::new("testCloseReason", vec![set("endpoint", "ready"), expect("endpoint", "ready")]),
        ],
    };

    let fixture = SimClass {
        name: "PathGlob".into(),
        before_all: vec![set("testDir", "home")],
        tests: vec![
            SimTest::new(
                "testWithStringAndConfForBuggyPath",
                vec![set("testDir", "tmp"), expect("testDir", "tmp")],
            ),
            SimTest::new("testAbsoluteGlob", vec![set("testDir", "home"), expect("testDir", "home")]),
        ],
    };

    (polluter_cleaner_victim, helper, fixture)
}

pub fn listings_suite() -> SimSuite {
    let (a, b, c) = listing_models();
    SimSuite {
        name: "listings".into(),
        module_path: "listings".into(),
        classes: vec![a, b, c],
        generator: None,
    }
}
