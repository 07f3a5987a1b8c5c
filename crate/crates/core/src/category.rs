//! Label taxonomy shared by masks, features and reports.
//!
//! Ids 2..=16 are the fifteen foods in the order used by the one-hot food
//! type block of the feature vector.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of food categories that take part in the one-hot encoding.
pub const FOOD_COUNT: usize = 15;

/// Number of label values a mask pixel may carry (0..=17).
pub const CATEGORY_COUNT: usize = 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
#[repr(u8)]
pub enum FoodCategory {
    Background = 0,
    Container = 1,
    OnionsTomatoSalad = 2,
    TilapiaFish = 3,
    Ugali = 4,
    Yam = 5,
    ChickenDrumstick = 6,
    SpinachStew = 7,
    Avocado = 8,
    Banku = 9,
    TomatoSoup = 10,
    RoastedBeef = 11,
    Chapati = 12,
    Onions = 13,
    FriedRice = 14,
    SaltedFish = 15,
    BeefStew = 16,
    OtherFood = 17,
}

const ALL: [FoodCategory; CATEGORY_COUNT] = [
    FoodCategory::Background,
    FoodCategory::Container,
    FoodCategory::OnionsTomatoSalad,
    FoodCategory::TilapiaFish,
    FoodCategory::Ugali,
    FoodCategory::Yam,
    FoodCategory::ChickenDrumstick,
    FoodCategory::SpinachStew,
    FoodCategory::Avocado,
    FoodCategory::Banku,
    FoodCategory::TomatoSoup,
    FoodCategory::RoastedBeef,
    FoodCategory::Chapati,
    FoodCategory::Onions,
    FoodCategory::FriedRice,
    FoodCategory::SaltedFish,
    FoodCategory::BeefStew,
    FoodCategory::OtherFood,
];

const NAMES: [&str; CATEGORY_COUNT] = [
    "Background",
    "Container",
    "Onions & tomato salad",
    "Tilapia fish",
    "Ugali",
    "Yam",
    "Chicken drumstick",
    "Spinach stew",
    "Avocado",
    "Banku",
    "Tomato soup",
    "Roasted beef",
    "Chapati",
    "Onions",
    "Fried rice",
    "Salted fish",
    "Beef stew",
    "Other food",
];

impl FoodCategory {
    /// Every label in id order.
    pub fn all() -> &'static [FoodCategory; CATEGORY_COUNT] {
        &ALL
    }

    /// The fifteen foods of the one-hot block, in encoding order.
    pub fn foods() -> &'static [FoodCategory] {
        &ALL[2..2 + FOOD_COUNT]
    }

    pub fn from_id(id: u8) -> Option<Self> {
        ALL.get(id as usize).copied()
    }

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        NAMES[self as usize]
    }

    /// Case-insensitive lookup by display name.
    pub fn from_name(name: &str) -> Option<Self> {
        let name = name.trim();
        NAMES
            .iter()
            .position(|n| n.eq_ignore_ascii_case(name))
            .map(|i| ALL[i])
    }

    /// Position in the one-hot food type block, `None` for background,
    /// container and the catch-all "Other food" label.
    pub fn food_index(self) -> Option<usize> {
        match self.id() {
            id @ 2..=16 => Some(id as usize - 2),
            _ => None,
        }
    }

    pub fn from_food_index(index: usize) -> Option<Self> {
        (index < FOOD_COUNT).then(|| ALL[index + 2])
    }

    /// True for every label that is drawn on top of a container (ids 2..=17).
    pub fn is_food(self) -> bool {
        self.id() >= 2
    }
}

impl fmt::Display for FoodCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown food category `{0}`")]
pub struct UnknownCategory(pub String);

impl FromStr for FoodCategory {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FoodCategory::from_name(s).ok_or_else(|| UnknownCategory(s.to_string()))
    }
}

impl TryFrom<String> for FoodCategory {
    type Error = UnknownCategory;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<FoodCategory> for String {
    fn from(value: FoodCategory) -> Self {
        value.name().to_string()
    }
}
