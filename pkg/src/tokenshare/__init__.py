"""Data-sharing platform with token-proportional revenue sharing.

Contributors upload text datasets; a preprocessing pipeline normalizes,
filters, and deduplicates them into countable tokens; a payout ledger
distributes a configured share of the data consumer's service revenue in
proportion to each contributor's surviving tokens.
"""

__version__ = "0.1.0"
