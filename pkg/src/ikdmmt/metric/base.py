class Base:
    def accumulate(self, hypothesis, reference, *, source=None):
        """Accumulate one translated sentence into this metric.

        :param hypothesis: Translated sentence, space separated.
        :param reference: Reference translation, space separated.
        :param source: Source sentence, for metrics that need it.
        """
        raise NotImplementedError

    def stats(self):
        """Summary of everything accumulated so far.

        Returns a dict with parallel lists of values and labels, for
        example ``{'stats': [41.28], 'text_labels': ['BLEU']}``.
        """
        raise NotImplementedError
