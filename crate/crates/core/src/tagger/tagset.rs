use std::fmt;
use std::str::FromStr;

macro_rules! tagset {
    ($($variant:ident => $name:literal),* $(,)?) => {
        /// Penn Treebank part-of-speech tags, punctuation tags included.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum PosTag {
            $($variant),*
        }

        impl PosTag {
            pub const ALL: &'static [PosTag] = &[$(PosTag::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(PosTag::$variant => $name),*
                }
            }
        }

        impl FromStr for PosTag {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(PosTag::$variant),)*
                    _ => Err(format!("unknown tag `{s}`")),
                }
            }
        }
    };
}

tagset! {
    CC => "CC", CD => "CD", DT => "DT", EX => "EX", FW => "FW", IN => "IN",
    JJ => "JJ", JJR => "JJR", JJS => "JJS", LS => "LS", MD => "MD",
    NN => "NN", NNS => "NNS", NNP => "NNP", NNPS => "NNPS",
    PDT => "PDT", POS => "POS", PRP => "PRP", PRPS => "PRP$",
    RB => "RB", RBR => "RBR", RBS => "RBS", RP => "RP", SYM => "SYM",
    TO => "TO", UH => "UH",
    VB => "VB", VBD => "VBD", VBG => "VBG", VBN => "VBN", VBP => "VBP", VBZ => "VBZ",
    WDT => "WDT", WP => "WP", WPS => "WP$", WRB => "WRB",
    OpenQuote => "``", CloseQuote => "''", Comma => ",", Period => ".", Colon => ":",
    LeftParen => "(", RightParen => ")", Hash => "#", Dollar => "$",
}

impl PosTag {
    pub fn is_noun(self) -> bool {
        matches!(self, PosTag::NN | PosTag::NNS | PosTag::NNP | PosTag::NNPS)
    }

    pub fn is_verb(self) -> bool {
        matches!(
            self,
            PosTag::MD | PosTag::VB | PosTag::VBD | PosTag::VBG | PosTag::VBN | PosTag::VBP | PosTag::VBZ
        )
    }

    /// Prenominal modifiers admitted inside a noun chunk.
    pub fn is_modifier(self) -> bool {
        matches!(
            self,
            PosTag::JJ | PosTag::JJR | PosTag::JJS | PosTag::VBN | PosTag::VBG | PosTag::CD
        )
    }

    pub fn is_quote(self) -> bool {
        matches!(self, PosTag::OpenQuote | PosTag::CloseQuote)
    }

    pub fn is_punct(self) -> bool {
        matches!(
            self,
            PosTag::OpenQuote
                | PosTag::CloseQuote
                | PosTag::Comma
                | PosTag::Period
                | PosTag::Colon
                | PosTag::LeftParen
                | PosTag::RightParen
                | PosTag::Hash
                | PosTag::Dollar
        )
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}
