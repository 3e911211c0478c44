use super::{CoarseTag, Gazetteer};

const RES: &[&str] = &[
    "manager",
    "director",
    "engineer",
    "senior",
    "president",
    "vice",
    "lead",
    "supervisor",
    "designer",
    "accountant",
    "technician",
    "junior",
    "associate",
    "assistant",
    "chief",
    "officer",
    "analyst",
    "consultant",
    "specialist",
    "head",
    "executive",
    "coordinator",
    "administrator",
    "developer",
    "architect",
    "intern",
    "founder",
    "partner",
    "principal",
    "owner",
    "scientist",
    "representative",
    "advisor",
    "strategist",
    "ceo",
    "cto",
    "cfo",
];

const FUN: &[&str] = &[
    "sales",
    "marketing",
    "finance",
    "operations",
    "strategy",
    "enterprise",
    "project",
    "customer",
    "national",
    "site",
    "data",
    "r&d",
    "security",
    "training",
    "integration",
    "education",
    "financial",
    "business",
    "product",
    "software",
    "account",
    "human",
    "resources",
    "technology",
    "development",
    "service",
    "quality",
    "research",
    "information",
    "supply",
    "chain",
    "legal",
    "communications",
    "procurement",
    "design",
    "global",
];

const LOC: &[&str] = &[
    "apac",
    "sea",
    "asia",
    "pacific",
    "european",
    "europe",
    "emea",
    "north",
    "south",
    "central",
    "east",
    "west",
    "china",
    "america",
    "singapore",
    "colorado",
    "india",
    "japan",
    "malaysia",
    "texas",
    "california",
];

const OTHER: &[&str] = &["and", "of", "the", "for", "in", "at", "to", "with"];

pub(super) fn builtin() -> Gazetteer {
    let pairs = RES
        .iter()
        .map(|t| (*t, CoarseTag::Res))
        .chain(FUN.iter().map(|t| (*t, CoarseTag::Fun)))
        .chain(LOC.iter().map(|t| (*t, CoarseTag::Loc)))
        .chain(OTHER.iter().map(|t| (*t, CoarseTag::O)));
    Gazetteer::from_pairs(pairs).expect("builtin gazetteer has unique tokens")
}
