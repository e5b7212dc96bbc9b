from pydantic import BaseModel, ConfigDict, Field


class HistogramBucket(BaseModel):
    label: str = Field(description='"7" for unit buckets, "51-60" for wide ones, ">200" for overflow.')
    low: int
    high: int | None = Field(default=None, description="Inclusive upper bound; None for the overflow bucket.")
    count: int = Field(default=0, ge=0)


class TokenCount(BaseModel):
    model_config = ConfigDict(frozen=True)

    rank: int = Field(ge=1)
    token: str
    count: int = Field(ge=0)


class SideStats(BaseModel):
    """One side (source or target) of one split."""

    sentence_count: int = Field(default=0, ge=0)
    token_count: int = Field(default=0, ge=0)
    min_length: int = Field(default=0, ge=0)
    max_length: int = Field(default=0, ge=0)
    mean_length: float = Field(default=0.0, ge=0.0, description="Mean tokens per sentence.")
    histogram: list[HistogramBucket] = Field(default_factory=list)
    token_freq: list[TokenCount] = Field(default_factory=list, description="Descending count, ties lexicographic.")
    vocab_size: int = Field(default=0, ge=0, description="Distinct token types observed.")
    unknown_count: int = Field(default=0, ge=0)
    mean_unknowns: float = Field(default=0.0, ge=0.0, description="Mean unknown tokens per sentence.")
    unknown_sentence_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    coverage: float = Field(default=0.0, ge=0.0, le=1.0, description="Share of tokens that are not unknown.")


class SplitStats(BaseModel):
    src: SideStats = Field(default_factory=SideStats)
    trg: SideStats = Field(default_factory=SideStats)


class DatasetStats(BaseModel):
    dataset: str = Field(description="Dataset label, e.g. multi30k_de-en_original.")
    variant: str | None = Field(default=None, description="Variant directory, absent for raw splits.")
    tokenization: str = Field(default="whitespace", description="Subword scheme used to count tokens.")
    splits: dict[str, SplitStats] = Field(default_factory=dict)
    token_freq: list[TokenCount] = Field(default_factory=list, description="All splits and sides combined.")
