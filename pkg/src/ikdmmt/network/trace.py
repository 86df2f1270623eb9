from typing import Iterator, List, Tuple

import torch

from ..errors import ContractError


class ActivationTrace:
    """Named stage outputs of a forward pass in execution order.

    Block outputs have plain names (``stage2``), layers inside a block are
    named ``<block>.<layer>``.
    """

    def __init__(self):
        self.entries: List[Tuple[str, torch.Tensor]] = []

    def add(self, name: str, value: torch.Tensor):
        if any(n == name for n, _ in self.entries):
            raise ContractError('duplicate trace entry {}'.format(name))
        self.entries.append((name, value))
        return value

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[Tuple[str, torch.Tensor]]:
        return iter(self.entries)

    def __getitem__(self, name: str) -> torch.Tensor:
        for n, value in self.entries:
            if n == name:
                return value
        raise KeyError(name)

    @property
    def names(self) -> List[str]:
        return [n for n, _ in self.entries]

    @property
    def last(self) -> Tuple[str, torch.Tensor]:
        return self.entries[-1]

    def blocks(self) -> List[Tuple[str, torch.Tensor]]:
        return [(n, v) for n, v in self.entries if '.' not in n]

    def layers(self) -> List[Tuple[str, torch.Tensor]]:
        return list(self.entries)
